from math import comb

import numpy as np
import pytest

from hamgeom.geometry import check_isolated, cut_report
from hamgeom.hamiltonian import HamiltonianError, is_stoquastic
from hamgeom.models import (
    adiabatic_path,
    diagonal_problem,
    ghz_epsilon,
    ghz_parent,
    history_state,
    identity_history_state,
    model_names,
    motzkin_chain,
    motzkin_words,
    parse_model,
    random_2local,
    random_adiabatic,
    random_costs,
    random_history_state,
    ring_arcs,
    ring_counterexample,
    ring_energies,
    transverse_driver,
    transverse_ising,
    zoo,
)
from hamgeom.spectra import eigensolve, ground_distribution, symmetry_adapted


def ground(model, k=2):
    s = eigensolve(model.matrix, k=k)
    psi = s.ground
    if model.symmetry is not None:
        psi = symmetry_adapted(psi, model.symmetry)
    return s, ground_distribution(s, model.matrix.scheme, ground_vector=psi if model.symmetry is not None else None)


@pytest.mark.parametrize(
    "ref",
    ["tim:n=4,gamma=0.5,alpha=1.0,ring=true", "ghz:n=4,gamma=0.2,k_local=2,ring=false", "motzkin:n=3",
     "ring:n=3,perturbed=true", "history:n=2,T=4,seed=1,padding=0", "adiabatic:n=3,s=0.5,seed=2",
     "random2local:n=3,seed=1", "identity-history:n=1,T=3", "blocktoy"],
)
def test_reference_round_trip(ref):
    m = parse_model(ref)
    assert parse_model(m.ref).ref == m.ref
    np.testing.assert_array_equal(parse_model(m.ref).matrix.toarray(), m.matrix.toarray())


@pytest.mark.parametrize("ref", ["nope:n=3", "tim:n=x", "tim:m=3", "tim:n", "tim:ring=maybe", "motzkin:n=1", "tim"])
def test_reference_errors(ref):
    with pytest.raises(HamiltonianError):
        parse_model(ref)


def test_registry_lists_all_models():
    assert set(model_names()) == {"tim", "ghz", "history", "identity-history", "motzkin", "ring",
                                  "adiabatic", "random2local", "blocktoy"}


def test_free_spin_ball_expansion_closed_form():
    n = 5
    m = transverse_ising(n, 1.0, 0.0)
    s, d = ground(m)
    for r, S in enumerate(m.cuts("hamming-ball")[:2]):
        rep = cut_report(m.matrix, s, d, S)
        assert rep.expansion == pytest.approx(comb(n, r) / sum(comb(n, j) for j in range(r + 1)))


def test_magnetization_cut_is_negative_magnetization():
    n = 6
    m = transverse_ising(n, 0.5, 1.0)
    (S,) = m.cuts("magnetization")
    for x in S.members:
        assert n - 2 * bin(x).count("1") < 0
    _, d = ground(m)
    assert d.pi[list(S.members)].sum() < 0.5


def test_ghz_near_cat_state_and_isolated_families():
    m = ghz_parent(6, 0.1)
    s, d = ground(m)
    assert ghz_epsilon(d, 6) < 0.01
    assert d.pi[0] == pytest.approx(d.pi[-1], abs=1e-14)
    for fam in ("isolated-pair", "isolated-triple"):
        subsets = m.cuts(fam, d)
        check_isolated(m.matrix, subsets)
        assert all(d.pi[list(S.members)].sum() <= 0.5 + 1e-12 for S in subsets)


def test_ghz_zero_field_degenerate():
    assert eigensolve(ghz_parent(4, 0.0).matrix, k=2).degenerate


def test_history_ground_state_is_history_vector():
    m = random_history_state(2, 5, seed=3)
    s, d = ground(m)
    assert s.e0 == pytest.approx(0.0, abs=1e-10)
    assert abs(np.vdot(m.ground_hint, s.ground)) == pytest.approx(1.0, abs=1e-9)
    block = 2**2
    clock = d.pi.reshape(6, block).sum(axis=1)
    np.testing.assert_allclose(clock, np.full(6, 1 / 6), atol=1e-10)


def test_identity_history_quarter_cut():
    m = identity_history_state(1, 3)
    s, d = ground(m)
    (S,) = m.cuts("clock-quarter")
    assert d.pi[list(S.members)].sum() == pytest.approx(0.25)
    assert S.labels(m.matrix.scheme) == {(0, "0"), (0, "1")}


def test_clock_windows_layout():
    gates = [(np.eye(2), (0,))] * 16
    m = history_state(gates, 1)
    windows = m.cuts("clock-windows")
    clocks = [sorted({lab[0] for lab in S.labels(m.matrix.scheme)}) for S in windows]
    assert clocks[0] == [3] and clocks[1] == [5]
    assert all(len(c) == 1 for c in clocks)


def test_history_rejects_non_unitary():
    with pytest.raises(HamiltonianError):
        history_state([(np.diag([1.0, 2.0]), (0,))], 1)


def test_motzkin_two_sites():
    m = motzkin_chain(2)
    s, d = ground(m)
    assert s.e0 == pytest.approx(0.0, abs=1e-12)
    assert d.prob("00") == pytest.approx(0.5)
    assert d.prob("12") == pytest.approx(0.5)


@pytest.mark.parametrize("n,count", [(2, 2), (3, 4), (4, 9), (5, 21)])
def test_motzkin_support_is_motzkin_words(n, count):
    m = motzkin_chain(n)
    _, d = ground(m)
    words = motzkin_words(n)
    assert len(words) == count
    assert d.support_labels() == set(words)
    np.testing.assert_allclose(d.pi[d.support], 1 / count, atol=1e-10)


def test_ring_small_matrix():
    a = ring_counterexample(2, perturbed=False).matrix.toarray()
    np.testing.assert_allclose(np.diag(a), 1.0)
    assert a[0, 4] == 0.5 and a[4, 0] == 0.5 and a[0, 1] == 0.5


@pytest.mark.parametrize("n", [2, 3, 5])
def test_ring_unperturbed_spectrum_and_degeneracy(n):
    m = ring_counterexample(n, perturbed=False)
    s = eigensolve(m.matrix, k=2 * n)
    np.testing.assert_allclose(s.energies, ring_energies(n)[: 2 * n + 1], atol=1e-12)
    assert s.degenerate
    d = ground_distribution(s, m.matrix.scheme, allow_degenerate=True, ground_vector=m.ground_hint)
    np.testing.assert_allclose(d.pi, 1 / (2 * n + 1))


def test_ring_perturbation_splits_degeneracy():
    s = eigensolve(ring_counterexample(6).matrix, k=2)
    assert not s.degenerate and s.gap > 0
    assert len(ring_arcs(5)) == 5 * 4


def test_adiabatic_end_points():
    n = 3
    costs = random_costs(n, seed=7)
    s0, d0 = ground(random_adiabatic(n, 0.0, seed=7))
    assert s0.e0 == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(d0.pi, 1 / 8, atol=1e-12)
    s1, d1 = ground(random_adiabatic(n, 1.0, seed=7))
    assert s1.e0 == pytest.approx(costs.min())
    assert d1.pi[np.argmin(costs)] == pytest.approx(1.0)
    with pytest.raises(HamiltonianError):
        adiabatic_path(transverse_driver(n), diagonal_problem(costs), 1.5)


def test_random_2local_is_seeded_and_nonstoquastic():
    a = random_2local(3, seed=9).matrix.toarray()
    np.testing.assert_array_equal(a, random_2local(3, seed=9).matrix.toarray())
    assert not np.array_equal(a, random_2local(3, seed=10).matrix.toarray())
    assert not is_stoquastic(random_2local(3, seed=9).matrix)


def test_zoo_builds_and_filters():
    models = zoo()
    assert len({m.name for m in models}) >= 6
    small = zoo(max_dim=16)
    assert small and all(m.dim <= 16 for m in small)
    for m in small:
        assert m.matrix.dim == m.dim
