"""The verification suite: ten numerical criteria with measured values.

Each ``criterion_N`` returns a :class:`CriterionResult`; :func:`run_all`
runs them in order.  The CLI ``verify`` command and
``tests/test_acceptance.py`` are thin wrappers around this module.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import linregress

from . import geometry
from .cuts import CutSearchConfig, isolated_family, min_conductance, min_expansion
from .geometry import CutEvaluator, iter_all_masks, multiway_bound, random_masks, variational_certificate
from .hamiltonian import DROP_TOL, from_dense
from .models import (
    ModelInstance,
    block_toy,
    ghz_epsilon,
    ghz_parent,
    random_2local,
    random_adiabatic,
    random_history_state,
    ring_arcs,
    ring_counterexample,
    transverse_ising,
    zoo,
)
from .projector import (
    amplitude_ratio_floor,
    build_G,
    build_P,
    centered,
    cheeger_prefactor,
    dirichlet_form,
    energy_form,
    interlacing_check,
    naive_cheeger_violation,
    pi_inner,
    variance_form,
    variance_form_pairs,
)
from .spectra import eigensolve, ground_distribution, symmetry_adapted

EXHAUSTIVE_DIM = 16
SAMPLED_SUBSETS = 10_000


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    runtime: float = 0.0
    budget: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool:
        return self.runtime <= self.budget

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"; {self.failures[0]}" if self.failures else ""
        return f"[{status}] criterion {self.number}: {self.title} ({self.runtime:.1f}s / {self.budget:.0f}s){extra}"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "runtime_s": round(self.runtime, 3),
            "budget_s": self.budget,
            "measured": _jsonable(self.measured),
            "failures": list(self.failures),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def linear_fit(x, y) -> dict:
    """Ordinary least squares ``y ~ a x + b`` with slope, intercept and R^2."""
    res = linregress(np.asarray(x, float), np.asarray(y, float))
    return {"slope": float(res.slope), "intercept": float(res.intercept), "r2": float(res.rvalue**2)}


def _solve(model: ModelInstance, k: int = 1, **kw):
    H = model.matrix
    s = eigensolve(H, k=min(k, H.dim - 1), **kw)
    d = ground_distribution(s, H.scheme)
    return H, s, d


def _timed(number: int, title: str, budget: float):
    def wrap(fn):
        def run(seed: int = 0) -> CriterionResult:
            t0 = time.perf_counter()
            measured, failures = fn(seed)
            elapsed = time.perf_counter() - t0
            if elapsed > budget:
                failures.append(f"runtime {elapsed:.1f}s exceeds {budget:.0f}s")
            return CriterionResult(number, title, not failures, measured, elapsed, budget, failures)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def candidate_masks(model: ModelInstance, dist, rng: np.random.Generator) -> tuple[np.ndarray, str]:
    """Every subset for tiny bases; otherwise samples plus all structured families."""
    d = model.dim
    if d <= EXHAUSTIVE_DIM:
        return np.concatenate(list(iter_all_masks(d))), "exhaustive"
    blocks = [random_masks(d, SAMPLED_SUBSETS, rng)]
    order = np.lexsort((np.arange(d), -dist.pi))
    diag_order = np.lexsort((np.arange(d), model.matrix.diagonal()))
    for o in (order, diag_order):
        m = np.zeros((d - 1, d), dtype=bool)
        for j in range(1, d):
            m[j - 1, o[:j]] = True
        blocks.append(m)
    for family in model.cut_families:
        try:
            subs = model.cuts(family, dist)
        except (ValueError, KeyError):
            continue
        if subs:
            blocks.append(np.array([s.mask(d) for s in subs]))
    return np.concatenate(blocks), "sampled+structured"


def _zoo_sweep(seed: int, key: str, dim_max: int = 256):
    measured, failures = {}, []
    rng = np.random.default_rng(seed)
    for model in zoo(max_dim=dim_max):
        H, s, d = _solve(model)
        masks, mode = candidate_masks(model, d, rng)
        vals = CutEvaluator(H, s, d).evaluate(masks)
        ok = vals["admissible"]
        slack = vals[key][ok]
        worst = float(slack.min() / s.spectral_diameter)
        measured[model.ref] = {"subsets": int(ok.sum()), "mode": mode, "min_slack_over_diameter": worst}
        if worst < -1e-9:
            failures.append(f"{model.ref}: slack/diameter {worst:.3e}")
    return measured, failures


@_timed(1, "expansion bound holds on every admissible subset of the zoo", 120)
def criterion_1(seed: int = 0):
    return _zoo_sweep(seed, "slack_thm1")


@_timed(2, "conductance bound holds; conductance non-negative and <= diameter * pi(dS)", 120)
def criterion_2(seed: int = 0):
    measured, failures = _zoo_sweep(seed, "slack_thm3")
    worst_neg, worst_excess = np.inf, -np.inf
    masks = np.concatenate(list(iter_all_masks(8)))
    for i in range(100):
        model = random_2local(3, seed=1000 * seed + i)
        H, s, d = _solve(model)
        bd = CutEvaluator(H, s, d).evaluate(masks)["pi_boundary_S"]
        for m, b in zip(masks, bd):
            cond = geometry.hamiltonian_conductance(H, d.psi, m)
            worst_neg = min(worst_neg, cond)
            worst_excess = max(worst_excess, cond / s.spectral_diameter - b)
    measured["random_2local"] = {
        "instances": 100,
        "subsets_each": int(masks.shape[0]),
        "min_conductance": worst_neg,
        "max_conductance_over_diameter_minus_boundary": worst_excess,
    }
    if worst_neg < -1e-10:
        failures.append(f"negative conductance {worst_neg:.3e}")
    if worst_excess > 1e-10:
        failures.append(f"conductance/diameter exceeds pi(dS) by {worst_excess:.3e}")
    return measured, failures


@_timed(3, "quasi-Markov structure of P and eigenvalue interlacing", 120)
def criterion_3(seed: int = 0):
    measured, failures = {}, []
    for model in zoo(max_dim=1024):
        H, s, d = _solve(model, k=5)
        if s.degenerate:
            continue
        proj = build_P(build_G(s, H), d, H)
        il = interlacing_check(s, proj, kmax=5)
        row = {
            "row_sum_error": proj.row_sum_error(),
            "detailed_balance_error": proj.detailed_balance_error(),
            "stationarity_error": proj.stationarity_error(),
            "interlacing_violation": il.max_violation,
            "full_support": il.full_support,
            "equality_error": il.equality_error,
        }
        measured[model.ref] = row
        if row["row_sum_error"] > 1e-10:
            failures.append(f"{model.ref}: row sums off by {row['row_sum_error']:.2e}")
        if row["detailed_balance_error"] > 1e-12:
            failures.append(f"{model.ref}: detailed balance off by {row['detailed_balance_error']:.2e}")
        if row["stationarity_error"] > 1e-10:
            failures.append(f"{model.ref}: stationarity off by {row['stationarity_error']:.2e}")
        if not il.ok:
            failures.append(f"{model.ref}: interlacing/equality violated")
    return measured, failures


@_timed(4, "ferromagnetic bottleneck at the magnetization cut", 300)
def criterion_4(seed: int = 0):
    ns, logs, rows, failures = [], [], {}, []
    for n in range(6, 13):
        model = transverse_ising(n, 0.5, 1.0, ring=True)
        H, s, d = _solve(model, dense_cutoff=2048)
        rep = geometry.cut_report(H, s, d, model.cuts("magnetization")[0])
        ns.append(n)
        logs.append(np.log(rep.pi_boundary))
        rows[n] = {"gap": s.gap, "pi_boundary": rep.pi_boundary, "bound_thm1": rep.bound_thm1, "solver": s.solver}
        if not rep.holds_thm1:
            failures.append(f"n={n}: bound {rep.bound_thm1:.3e} below gap {s.gap:.3e}")
    fit = linear_fit(ns, logs)
    if not (fit["slope"] < 0 and fit["r2"] >= 0.95):
        failures.append(f"ln pi(dS) fit slope {fit['slope']:.3f}, R^2 {fit['r2']:.4f}")
    return {"points": rows, "fit_ln_pi_boundary": fit}, failures


@_timed(5, "history-state gap bound scales as 1/T", 300)
def criterion_5(seed: int = 0):
    rows, scaled, failures = [], [], []
    for T in (4, 8, 16, 32, 64):
        for j in range(5):
            model = random_history_state(3, T, seed=100 * seed + j)
            H, s, d = _solve(model)
            rep = geometry.cut_report(H, s, d, model.cuts("clock-quarter")[0])
            scaled.append(rep.bound_thm3 * T)
            rows.append({"T": T, "seed": 100 * seed + j, "gap": s.gap, "bound_thm3": rep.bound_thm3, "pi_S": rep.pi_S})
            if not rep.holds_thm3:
                failures.append(f"T={T}: bound {rep.bound_thm3:.3e} below gap {s.gap:.3e}")
    ratio = max(scaled) / min(scaled)
    if ratio > 4:
        failures.append(f"max/min of T * bound is {ratio:.3f}")
    return {"points": rows, "T_times_bound_ratio": ratio}, failures


@_timed(6, "ring counterexample to the naive Cheeger lower bound", 60)
def criterion_6(seed: int = 0):
    ns, gaps, phis, rows, failures = [], [], [], {}, []
    for n in range(6, 13):
        model = ring_counterexample(n, perturbed=True)
        H, s, d = _solve(model, k=2)
        arcs = ring_arcs(H.dim)
        v = naive_cheeger_violation(H, s, d, arcs)
        v_gap = naive_cheeger_violation(H, s, d, arcs, delta_P=s.gap / s.spectral_diameter)
        ns.append(n)
        gaps.append(s.gap)
        phis.append(v.phi)
        rows[n] = {
            "gap": s.gap,
            "phi": v.phi,
            "delta_P": v.delta_P,
            "violation_factor": v.factor,
            "support_size": int(d.support.sum()),
            "dim": H.dim,
            "violation_factor_with_gap_over_diameter": v_gap.factor,
        }
    gap_fit = linear_fit(ns, np.log2(gaps))
    phi_fit = linear_fit(np.log(ns), np.log(phis))
    c = min(p * n**2 for p, n in zip(phis, ns))
    if not -1.3 <= gap_fit["slope"] <= -0.7:
        failures.append(f"log2 gap slope {gap_fit['slope']:.3f}")
    if not -2.5 <= phi_fit["slope"] <= -1.5:
        failures.append(f"Phi power-law exponent {phi_fit['slope']:.3f} outside [-2.5, -1.5]")
    if rows[10]["violation_factor"] <= 1e3:
        failures.append(f"violation factor at n=10 is {rows[10]['violation_factor']:.3g}")
    return {"points": rows, "fit_log2_gap": gap_fit, "fit_log_phi_vs_log_n": phi_fit, "c_phi_n2": c}, failures


@_timed(7, "stoquastic Cheeger lower bound and amplitude-ratio floor on adiabatic paths", 300)
def criterion_7(seed: int = 0):
    failures, worst, count, floors_ok, rows = [], 0.0, 0, True, []
    s_values = [round(0.1 * i, 1) for i in range(1, 10)]
    exhaustive4 = np.concatenate(list(iter_all_masks(16)))
    for n in (4, 5, 6):
        for cost_seed in range(10):
            rng = np.random.default_rng([seed, n, cost_seed])
            for s_val in s_values:
                model = random_adiabatic(n, s_val, seed=1000 * seed + cost_seed)
                H, s, d = _solve(model)
                masks = exhaustive4 if n == 4 else random_masks(H.dim, SAMPLED_SUBSETS, rng)
                vals = CutEvaluator(H, s, d).evaluate(masks)
                lower = cheeger_prefactor(s, H) * vals["expansion"][vals["admissible"]] ** 2
                ratio = float(lower.max() / s.gap)
                worst = max(worst, ratio)
                count += int(vals["admissible"].sum())
                floor = amplitude_ratio_floor(s, d, H)
                floors_ok &= floor.ok
                if ratio > 1.0:
                    failures.append(f"n={n}, s={s_val}, cost {cost_seed}: lower bound exceeds gap x{ratio:.3g}")
                if not floor.ok:
                    failures.append(f"n={n}, s={s_val}, cost {cost_seed}: amplitude ratio {floor.min_ratio:.3e} < {floor.floor:.3e}")
                rows.append({"n": n, "s": s_val, "cost_seed": cost_seed, "gap": s.gap, "max_lower_over_gap": ratio,
                             "min_amplitude_ratio": floor.min_ratio, "floor": floor.floor})
    return {"max_lower_bound_over_gap": worst, "subsets": count, "floors_ok": floors_ok, "points": rows}, failures


@_timed(8, "multiway bound on isolated families", 120)
def criterion_8(seed: int = 0):
    measured, failures = {}, []
    n = 8
    ghz = ghz_parent(n, 0.1, k_local=2)
    H, s, _ = _solve(ghz, k=5)
    d = ground_distribution(s, H.scheme, ground_vector=symmetry_adapted(s.ground, ghz.symmetry))
    eps = ghz_epsilon(d, n)
    ghz_rhs = 4 * eps * s.spectral_diameter / ((n // 2) * (1 - eps))
    balls = ghz.cuts("hamming-ball", d)
    bd4 = geometry.boundary(balls[1], H)
    measured["ghz"] = {"epsilon": eps, "gap": s.gap, "ghz_bound": ghz_rhs,
                       "boundary_B4_meets_B2": bool(bd4.members & balls[0].members)}
    if eps >= 0.1:
        failures.append(f"GHZ epsilon {eps:.3g} >= 0.1")
    if s.gap > ghz_rhs:
        failures.append(f"GHZ gap {s.gap:.3e} exceeds {ghz_rhs:.3e}")
    if bd4.members & balls[0].members:
        failures.append("boundary of B_4 meets B_2")
    families = {
        "isolated-pair": ghz.cuts("isolated-pair", d),
        "isolated-triple": ghz.cuts("isolated-triple", d),
        "grown": isolated_family(H, d, max_count=6),
    }
    for name, fam in families.items():
        for k in range(1, min(len(fam), len(s.energies))):
            rep = multiway_bound(H, s, d, fam[: k + 1], k=k)
            measured[f"ghz/{name}/k={k}"] = rep.to_dict()
            if not (rep.holds_expansion and rep.holds_conductance):
                failures.append(f"GHZ {name} k={k}: multiway bound fails")

    hist = random_history_state(3, 81, seed=seed)
    windows = hist.cuts("clock-windows")
    H, s, d = _solve(hist, k=len(windows) - 1)
    measured["history_windows"] = len(windows)
    for k in sorted({1, 2, 3, 5, 10, len(windows) - 1}):
        rep = multiway_bound(H, s, d, windows[: k + 1], k=k)
        measured[f"history/k={k}"] = rep.to_dict()
        if not (rep.holds_expansion and rep.holds_conductance):
            failures.append(f"history windows k={k}: multiway bound fails")

    toy = block_toy()
    H = toy.matrix
    s = eigensolve(H, k=1)
    d = ground_distribution(s, H.scheme, allow_degenerate=True, ground_vector=toy.ground_hint)
    rep = multiway_bound(H, s, d, toy.cuts("blocks"), k=1)
    measured["block_toy"] = rep.to_dict()
    if not (rep.excitation == 0.0 and rep.bound_expansion == 0.0 and rep.bound_conductance == 0.0):
        failures.append(f"block toy: excitation {rep.excitation!r}, bounds {rep.bound_expansion!r}, {rep.bound_conductance!r}")
    return measured, failures


def random_instance(seed: int, dim: int | None = None):
    """Random sparse complex Hermitian matrix with 3 <= dim <= 10."""
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(3, 11)) if dim is None else dim
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    keep = np.triu(rng.random((dim, dim)) < 0.5, 1)
    a = np.where(keep, a, 0)
    a = a + a.conj().T + np.diag(rng.standard_normal(dim))
    return from_dense(a, labels="digits", site_dims=(dim,))


def oracle_minimum(matrix, psi: np.ndarray, objective: str, threshold: float = 1e-14) -> float:
    """Brute-force minimum by subset size via ``itertools.combinations``."""
    h = matrix.toarray()
    d = len(psi)
    pi = np.abs(psi) ** 2
    best = np.inf
    everything = set(range(d))
    for size in range(1, d):
        for S in combinations(range(d), size):
            rest = sorted(everything.difference(S))
            p_s = sum(pi[x] for x in S)
            p_c = sum(pi[y] for y in rest)
            if p_s <= threshold or p_c <= threshold:
                continue
            if objective == "expansion":
                small, other, p_small = (S, rest, p_s) if p_s <= 0.5 else (rest, S, p_c)
                bd = sum(pi[x] for x in small if any(abs(h[x, y]) > DROP_TOL for y in other))
                val = bd / p_small
            else:
                flux = sum(np.conj(psi[x]) * h[x, y] * psi[y] for x in S for y in rest)
                val = -flux.real / (p_s * p_c)
            best = min(best, val)
    return float(best)


@_timed(9, "exhaustive search agrees with a brute-force oracle", 60)
def criterion_9(seed: int = 0):
    rows, failures = [], []
    cfg = CutSearchConfig("exhaustive", seed=seed)
    for i in range(20):
        H = random_instance(10_000 + 100 * seed + i)
        s = eigensolve(H, k=1)
        d = ground_distribution(s, H.scheme)
        for objective, search in (("expansion", min_expansion), ("conductance", min_conductance)):
            rep = search(H, s, d, cfg)
            got = rep.expansion if objective == "expansion" else rep.bound_thm3
            want = oracle_minimum(H, d.psi, objective)
            err = abs(got - want) / max(abs(want), 1e-300)
            rows.append({"instance": i, "dim": H.dim, "objective": objective, "search": got, "oracle": want})
            if err > 1e-12:
                failures.append(f"instance {i} {objective}: search {got!r} vs oracle {want!r}")
    return {"comparisons": rows}, failures


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _energy_rel(a: float, b: float, scale: float) -> float:
    """Relative error of two energies; energies have no natural zero, so the
    spectral diameter sets a floor on the scale."""
    return abs(a - b) / max(abs(a), abs(b), scale)


@_timed(10, "Dirichlet/variance identities and the variational certificate", 120)
def criterion_10(seed: int = 0):
    measured, failures = {}, []
    rng = np.random.default_rng(seed)
    for model in zoo():
        H, s, d = _solve(model)
        if s.degenerate or H.dim > 4096:
            continue
        proj = build_P(build_G(s, H), d, H)
        worst_dir = worst_sym = worst_var = 0.0
        for _ in range(100):
            f = rng.standard_normal(proj.omega.size) + 1j * rng.standard_normal(proj.omega.size)
            f = centered(proj, f)
            dform = dirichlet_form(proj, f)
            worst_dir = max(worst_dir, _rel(dform, energy_form(proj, f)))
            sym = 0.5 * (energy_form(proj, f) + energy_form(proj, np.conj(f)))
            worst_sym = max(worst_sym, _rel(dform, sym))
            v = variance_form(proj, f)
            worst_var = max(worst_var, _rel(v, variance_form_pairs(proj, f)), _rel(v, pi_inner(proj, f, f).real))
        row = {
            "complex_P": bool(np.any(np.abs(proj.P.data.imag) > 0)),
            "dirichlet_vs_energy_rel_error": worst_dir,
            "dirichlet_vs_symmetrized_energy_rel_error": worst_sym,
            "variance_rel_error": worst_var,
        }
        if worst_dir > 1e-10:
            failures.append(f"{model.ref}: Dirichlet form differs from <f,(I-P)f> by {worst_dir:.2e} (relative)")
        if worst_var > 1e-10:
            failures.append(f"{model.ref}: variance identity error {worst_var:.2e}")
        if H.dim <= 64:
            masks, mode = candidate_masks(model, d, rng)
            vals = CutEvaluator(H, s, d).evaluate(masks)
            worst_cert = 0.0
            for m in masks[vals["admissible"]]:
                cert = variational_certificate(H, s, d, m)
                thm3 = geometry.hamiltonian_conductance(H, d.psi, m) / (d.pi[m].sum() * d.pi[~m].sum())
                worst_cert = max(worst_cert, _energy_rel(cert, s.e0 + thm3, s.spectral_diameter))
            row.update({"certificate_rel_error": worst_cert, "certificate_mode": mode, "certificate_subsets": int(vals["admissible"].sum())})
            if worst_cert > 1e-9:
                failures.append(f"{model.ref}: certificate error {worst_cert:.2e}")
        measured[model.ref] = row
    return measured, failures


CRITERIA = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
)


def run_all(seed: int = 0, only: list[int] | None = None, echo=None) -> list[CriterionResult]:
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if only and i not in only:
            continue
        res = fn(seed)
        if echo:
            echo(res.line())
        results.append(res)
    return results
