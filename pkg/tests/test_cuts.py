from itertools import combinations

import numpy as np
import pytest

from hamgeom.cuts import (
    CutSearchConfig,
    CutSearchError,
    isolated_family,
    min_conductance,
    min_expansion,
)
from hamgeom.geometry import GeometryError, Subset, check_isolated, cut_report
from hamgeom.hamiltonian import HamiltonianSpec, LocalTerm, SparseHermitian, build, from_dense, sum_specs
from hamgeom.models import (
    diagonal_problem,
    ghz_parent,
    identity_history_state,
    random_2local,
    ring_counterexample,
    transverse_ising,
)
from hamgeom.spectra import eigensolve, ground_distribution


def solved(model_or_matrix):
    H = model_or_matrix if isinstance(model_or_matrix, SparseHermitian) else model_or_matrix.matrix
    s = eigensolve(H, k=2)
    return H, s, ground_distribution(s, H.scheme)


def brute_force_minimum(H, s, d, key):
    """Independent oracle: every proper subset via itertools, scored by cut_report."""
    best = np.inf
    for r in range(1, H.dim):
        for members in combinations(range(H.dim), r):
            try:
                rep = cut_report(H, s, d, Subset(members))
            except GeometryError:
                continue
            best = min(best, getattr(rep, key))
    return best


@pytest.mark.parametrize("model", [transverse_ising(3, 1.0, 0.0), transverse_ising(3, 0.4, 1.0), random_2local(3, seed=2)])
def test_exhaustive_matches_brute_force(model):
    H, s, d = solved(model)
    cfg = CutSearchConfig("exhaustive")
    rep = min_expansion(H, s, d, cfg)
    assert rep.expansion == pytest.approx(brute_force_minimum(H, s, d, "expansion"), rel=1e-12)
    assert rep.pi_S <= 0.5
    rep = min_conductance(H, s, d, cfg)
    assert rep.bound_thm3 == pytest.approx(brute_force_minimum(H, s, d, "bound_thm3"), rel=1e-12)


def test_uniform_cube_minimum_expansion():
    H, s, d = solved(transverse_ising(3, 1.0, 0.0))
    rep = min_expansion(H, s, d, CutSearchConfig("exhaustive"))
    # the radius-one Hamming ball: three of its four members touch the outside
    assert rep.expansion == pytest.approx(0.75)
    assert rep.size == 4


def test_exhaustive_cap():
    H, s, d = solved(transverse_ising(5, 1.0, 1.0))
    with pytest.raises(CutSearchError):
        min_expansion(H, s, d, CutSearchConfig("exhaustive"))


def test_config_validation():
    with pytest.raises(CutSearchError):
        CutSearchConfig("simulated-annealing")
    with pytest.raises(CutSearchError):
        CutSearchConfig("random", max_subsets=0)


def test_magnetization_strategy_returns_negative_magnetization():
    n = 6
    H, s, d = solved(transverse_ising(n, 0.5, 1.0))
    rep = min_expansion(H, s, d, CutSearchConfig("magnetization"))
    assert not rep.swapped
    assert all(n - 2 * bin(x).count("1") < 0 for x in rep.subset.members)


def test_clock_window_picks_first_quarter():
    m = identity_history_state(1, 3)
    H, s, d = solved(m)
    rep = min_expansion(H, s, d, CutSearchConfig("clock-window"))
    assert rep.pi_S == pytest.approx(0.25)
    assert rep.subset.labels(H.scheme) == {(0, "0"), (0, "1")}


def test_structured_strategies_need_matching_basis():
    H, s, d = solved(ring_counterexample(3))
    for strategy in ("hamming-ball", "magnetization", "clock-window"):
        with pytest.raises(CutSearchError):
            min_expansion(H, s, d, CutSearchConfig(strategy))


def double_well(n, bias, gamma):
    """Diagonal double well in Hamming weight (right well shallower by ``bias``) plus a transverse field."""
    w = np.array([bin(i).count("1") for i in range(2**n)])
    f = -np.where(w <= n / 2, (n / 2 - w) ** 2, (1 - bias) * (w - n / 2) ** 2)
    field = HamiltonianSpec((2,) * n, tuple(LocalTerm.pauli_string("X", -gamma, [i]) for i in range(n)), "bits")
    return build(sum_specs([diagonal_problem(f), field]))


@pytest.mark.parametrize("n", [3, 4])
def test_sweep_within_factor_two_of_exhaustive_on_double_well(n):
    H, s, d = solved(double_well(n, bias=0.3, gamma=0.2))
    best = min_conductance(H, s, d, CutSearchConfig("exhaustive")).bound_thm3
    sweep = min_conductance(H, s, d, CutSearchConfig("sweep-amplitude")).bound_thm3
    assert best <= sweep <= 2 * best


def test_greedy_improves_on_sweeps():
    H, s, d = solved(random_2local(4, seed=3))
    sweeps = min(
        min_conductance(H, s, d, CutSearchConfig(st)).bound_thm3 for st in ("sweep-amplitude", "sweep-diagonal")
    )
    greedy = min_conductance(H, s, d, CutSearchConfig("greedy", seed=1))
    assert greedy.bound_thm3 <= sweeps + 1e-15


def test_random_strategy_is_seeded():
    H, s, d = solved(transverse_ising(5, 0.5, 1.0))
    a = min_expansion(H, s, d, CutSearchConfig("random", max_subsets=300, seed=4))
    b = min_expansion(H, s, d, CutSearchConfig("random", max_subsets=300, seed=4))
    assert a.subset == b.subset and a.expansion == b.expansion


def test_isolated_family_on_complete_graph():
    a = -np.ones((6, 6)) + np.diag(np.arange(6.0))
    H, s, d = solved(from_dense(a, labels="digits", site_dims=(6,)))
    assert len(isolated_family(H, d)) <= 1


def test_isolated_family_is_isolated_and_light():
    H, s, d = solved(ghz_parent(6, 0.3))
    fam = isolated_family(H, d)
    assert len(fam) >= 2
    check_isolated(H, fam)
    assert all(0 < d.pi[list(S.members)].sum() <= 0.5 for S in fam)
