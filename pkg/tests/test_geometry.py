from math import comb

import numpy as np
import pytest

from hamgeom.geometry import (
    CutEvaluator,
    GeometryError,
    Subset,
    all_masks,
    boundary,
    check_isolated,
    cut_report,
    hamiltonian_conductance,
    multiway_bound,
    random_masks,
    variational_certificate,
)
from hamgeom.models import block_toy, motzkin_chain, random_2local, transverse_ising
from hamgeom.spectra import eigensolve, ground_distribution


def solved(model, k=1):
    H = model.matrix
    s = eigensolve(H, k=k)
    return H, s, ground_distribution(s, H.scheme)


@pytest.fixture(scope="module")
def cube():
    return solved(transverse_ising(3, 1.0, 0.0), k=3)


@pytest.fixture(scope="module")
def nonstoq():
    return solved(random_2local(3, seed=11), k=3)


def brute_boundary(H, mask):
    a = H.toarray()
    return {x for x in np.flatnonzero(mask) if any(abs(a[x, y]) > 1e-12 for y in np.flatnonzero(~mask))}


def test_uniform_cube_ball_expansion(cube):
    H, s, d = cube
    weights = np.array([bin(i).count("1") for i in range(8)])
    for k in range(2):
        ball = weights <= k
        rep = cut_report(H, s, d, ball)
        want = comb(3, k) / sum(comb(3, j) for j in range(k + 1))
        assert rep.expansion == pytest.approx(want)
        assert rep.bound_thm1 == pytest.approx(2 * 6 * want)
        assert rep.holds_thm1 and rep.holds_thm3


def test_boundary_matches_brute_force(nonstoq):
    H, _, _ = nonstoq
    rng = np.random.default_rng(0)
    for mask in random_masks(8, 30, rng):
        assert set(boundary(mask, H).members) == brute_boundary(H, mask)


def test_conductance_symmetric_and_nonnegative(nonstoq):
    H, s, d = nonstoq
    for mask in all_masks(8):
        c = hamiltonian_conductance(H, d.psi, mask)
        assert c >= -1e-12
        assert c == pytest.approx(hamiltonian_conductance(H, d.psi, ~mask), abs=1e-12)
        assert c / s.spectral_diameter <= d.pi[sorted(boundary(mask, H).members)].sum() + 1e-12


def test_swap_rule(cube):
    H, s, d = cube
    big = np.ones(8, dtype=bool)
    big[0] = False
    rep = cut_report(H, s, d, big)
    assert rep.swapped
    assert rep.expansion == pytest.approx(1.0)  # the complement is the single state 000
    with pytest.raises(GeometryError):
        cut_report(H, s, d, big, swap=False)


def test_zero_mass_subset_rejected():
    H, s, d = solved(motzkin_chain(2))
    outside = ~d.support
    with pytest.raises(GeometryError):
        cut_report(H, s, d, outside)


def test_subset_labels_round_trip(cube):
    H, _, _ = cube
    S = Subset.from_labels(H.scheme, ["000", "001"])
    assert S.sorted() == (0, 1)
    assert S.labels(H.scheme) == {"000", "001"}
    assert len(S.complement(8)) == 6


def test_evaluator_matches_scalar_reports(nonstoq):
    H, s, d = nonstoq
    masks = all_masks(8)
    vals = CutEvaluator(H, s, d).evaluate(masks)
    for i in range(0, masks.shape[0], 17):
        rep = cut_report(H, s, d, masks[i])
        assert vals["expansion"][i] == pytest.approx(rep.expansion, rel=1e-12)
        assert vals["bound_thm3"][i] == pytest.approx(rep.bound_thm3, rel=1e-12)
        assert vals["pi_boundary"][i] == pytest.approx(rep.pi_boundary, rel=1e-12)


def test_variational_certificate_identity(nonstoq):
    H, s, d = nonstoq
    for mask in all_masks(8)[::5]:
        rep = cut_report(H, s, d, mask)
        cert = variational_certificate(H, s, d, mask)
        assert cert == pytest.approx(s.e0 + rep.bound_thm3, rel=1e-10, abs=1e-10)
        assert cert >= s.energies[1] - 1e-10


def test_multiway_single_subset_reproduces_conductance_bound(nonstoq):
    H, s, d = nonstoq
    mask = np.array([1, 1, 0, 0, 1, 0, 0, 0], dtype=bool)
    rep = multiway_bound(H, s, d, [mask], k=1)
    assert rep.bound_conductance == pytest.approx(cut_report(H, s, d, mask).bound_thm3)
    assert rep.holds_conductance and rep.holds_expansion


def test_multiway_block_toy_zero_both_sides():
    toy = block_toy()
    H = toy.matrix
    s = eigensolve(H, k=1)
    d = ground_distribution(s, H.scheme, allow_degenerate=True, ground_vector=toy.ground_hint)
    rep = multiway_bound(H, s, d, toy.cuts("blocks"), k=1)
    assert rep.excitation == 0.0
    assert rep.bound_expansion == 0.0 and rep.bound_conductance == 0.0
    assert rep.basis_dependent


def test_multiway_rejects_non_isolated(cube):
    H, s, d = cube
    a = np.zeros(8, dtype=bool)
    a[0] = True
    b = np.zeros(8, dtype=bool)
    b[1] = True  # 000 and 001 are adjacent
    with pytest.raises(GeometryError):
        multiway_bound(H, s, d, [a, b])
    with pytest.raises(GeometryError):
        check_isolated(H, [a, a])
    c = np.zeros(8, dtype=bool)
    c[7] = True
    multiway_bound(H, s, d, [a, c])
    with pytest.raises(GeometryError):
        multiway_bound(H, s, d, [a, c], k=2)


def test_mask_validation(cube):
    H, s, d = cube
    with pytest.raises(GeometryError):
        cut_report(H, s, d, np.ones(5, dtype=bool))
