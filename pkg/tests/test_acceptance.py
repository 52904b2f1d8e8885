"""Acceptance criteria, each run once at its stated tolerance.

One pass/fail line per criterion is printed in the terminal summary.
"""

import numpy as np
import pytest

from hamgeom import acceptance, geometry

NUMBERS = range(1, len(acceptance.CRITERIA) + 1)


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(number, acceptance_results):
    res = acceptance_results(0)[number - 1]
    assert res.number == number
    print(res.line())
    assert res.passed, res.line() + "\n" + "\n".join(res.failures)


def test_pass_fail_pattern_is_seed_independent(acceptance_results):
    a = [r.passed for r in acceptance_results(0)]
    b = [r.passed for r in acceptance_results(1)]
    assert a == b


def test_results_serialize(acceptance_results):
    for res in acceptance_results(0):
        d = res.to_dict()
        assert d["criterion"] == res.number and d["budget_s"] > 0
        assert res.within_budget


def test_sign_flipped_conductance_is_caught(monkeypatch):
    original = geometry.hamiltonian_conductance
    monkeypatch.setattr(geometry, "hamiltonian_conductance", lambda *a, **k: -original(*a, **k))
    res = acceptance.criterion_2(0)
    assert not res.passed
    assert any("negative conductance" in f for f in res.failures)


def test_brute_force_oracle_matches_evaluator():
    H = acceptance.random_instance(3)
    s = acceptance.eigensolve(H, k=1)
    d = acceptance.ground_distribution(s, H.scheme)
    want = acceptance.oracle_minimum(H, d.psi, "expansion")
    masks = np.concatenate(list(geometry.iter_all_masks(H.dim)))
    vals = geometry.CutEvaluator(H, s, d).evaluate(masks)
    got = np.where(vals["admissible"], vals["expansion"], np.inf).min()
    assert got == pytest.approx(want, rel=1e-12)


def test_linear_fit_recovers_line():
    fit = acceptance.linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert fit["slope"] == pytest.approx(2) and fit["intercept"] == pytest.approx(1) and fit["r2"] == pytest.approx(1)
