"""Command-line front end: ``hamgeom analyze|sweep|search-cuts|verify|report``.

Exit codes: 0 success, 1 a checked inequality or criterion failed,
2 invalid model/spec/arguments, 3 eigensolver failure, 4 Hamiltonian
without off-diagonal elements.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance
from .cuts import STRATEGIES, CutSearchConfig, CutSearchError, search
from .geometry import CutEvaluator, CutReport, GeometryError, cut_report, iter_all_masks
from .hamiltonian import HamiltonianError, NoOffDiagonalError, is_irreducible, is_stoquastic, load_spec
from .models import ModelInstance, parse_model, ring_arcs
from .projector import (
    ProjectorError,
    build_G,
    build_P,
    cheeger_prefactor,
    interlacing_check,
    naive_cheeger_violation,
)
from .spectra import DENSE_CUTOFF, DegenerateGroundStateError, SolverError, eigensolve, ground_distribution

log = logging.getLogger("hamgeom")

EXIT_OK, EXIT_CHECK, EXIT_SPEC, EXIT_SOLVER, EXIT_NO_OFFDIAG = 0, 1, 2, 3, 4
CSV_LISTING_DIM = 16


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    spec_file: str | None = None
    k: int = 5
    dense_cutoff: int = DENSE_CUTOFF
    strategy: str = "auto"
    max_subsets: int = 10_000
    grid: list = field(default_factory=list)
    seed: int = 0
    out: str = "out"
    workers: int = 1
    only: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise HamiltonianError(f"unknown run-config keys: {sorted(unknown)}")
        return cls(**data)


# -- helpers -----------------------------------------------------------------

def _load_model(cfg: RunConfig) -> ModelInstance:
    if bool(cfg.model) == bool(cfg.spec_file):
        raise HamiltonianError("give exactly one of --model or --spec-file")
    if cfg.model:
        return parse_model(cfg.model)
    spec = load_spec(cfg.spec_file)
    return ModelInstance("spec-file", spec, {"path": str(cfg.spec_file)})


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(acceptance._jsonable(data), indent=2, sort_keys=False) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _g17(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def _strategies_for(model: ModelInstance, requested: str) -> list[str]:
    if requested != "auto":
        return [s for s in STRATEGIES] if requested == "all" else [requested]
    out = ["exhaustive"] if model.dim <= CSV_LISTING_DIM else ["sweep-amplitude", "sweep-diagonal", "greedy"]
    kind = model.spec.labels
    if kind == "bits":
        out += ["hamming-ball", "magnetization"]
    elif kind in ("trits", "digits"):
        out.append("hamming-ball")
    elif kind == "clocked-bits":
        out.append("clock-window")
    return out


def _solve(model: ModelInstance, cfg: RunConfig):
    H = model.matrix
    if H.offdiag().nnz == 0:
        raise NoOffDiagonalError("Hamiltonian has no off-diagonal elements: every subset is isolated")
    k = max(1, min(cfg.k, H.dim - 1))
    s = eigensolve(H, k=k, dense_cutoff=cfg.dense_cutoff, seed=cfg.seed)
    if s.degenerate:
        if model.ground_hint is None:
            raise DegenerateGroundStateError("degenerate ground state and the model supplies no preferred vector")
        d = ground_distribution(s, H.scheme, allow_degenerate=True, ground_vector=model.ground_hint)
    else:
        d = ground_distribution(s, H.scheme)
    return H, s, d


def _report_dict(rep: CutReport, scheme=None) -> dict:
    out = {k: getattr(rep, k) for k in (
        "size", "pi_S", "pi_boundary", "pi_complement", "expansion", "conductance", "bound_thm1",
        "bound_thm3", "slack_thm1", "slack_thm3", "swapped", "basis_dependent", "holds_thm1", "holds_thm3")}
    out["label"] = rep.label
    out["members"] = list(rep.subset.sorted())
    return out


def _search_all(model, H, s, d, cfg) -> tuple[dict, list]:
    incumbents, rows = {}, []
    for strategy in _strategies_for(model, cfg.strategy):
        conf = CutSearchConfig(strategy, cfg.max_subsets, cfg.seed)
        for objective in ("expansion", "conductance"):
            key = f"{strategy}/{objective}"
            try:
                rep = search(H, s, d, conf, objective)
            except (CutSearchError, GeometryError) as exc:
                incumbents[key] = {"error": str(exc)}
                continue
            incumbents[key] = _report_dict(rep)
            rows.append(rep.csv_row(key))
    return incumbents, rows


def _projector_report(model, H, s, d) -> dict:
    if d.basis_dependent:
        return {"applicable": False, "reason": "degenerate ground state"}
    proj = build_P(build_G(s, H), d, H)
    il = interlacing_check(s, proj)
    out = {
        "applicable": True,
        "support_size": int(proj.omega.size),
        "full_support": proj.full_support,
        "stoquastic": proj.stoquastic,
        "irreducible": proj.irreducible,
        "row_sum_error": proj.row_sum_error(),
        "detailed_balance_error": proj.detailed_balance_error(),
        "stationarity_error": proj.stationarity_error(),
        "delta_P": proj.delta_P,
        "interlacing": il.to_dict(),
    }
    if proj.stoquastic and proj.irreducible:
        out["thm4_prefactor"] = cheeger_prefactor(s, H)
    return out


def _violation_candidates(model: ModelInstance) -> np.ndarray | None:
    if model.name == "ring":
        return ring_arcs(model.dim)
    if model.dim <= CSV_LISTING_DIM:
        return np.concatenate(list(iter_all_masks(model.dim)))
    return None


# -- commands ------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    H, s, d = _solve(model, cfg)
    out = Path(cfg.out)
    checks = {}
    summary = {
        "config": cfg.to_dict(),
        "model": {"name": model.name, "ref": model.ref, "params": model.params, "dim": model.dim},
        "spectrum": s.to_dict(),
        "distribution": {"support_size": int(d.support.sum()), "full_support": d.full_support,
                         "basis_dependent": d.basis_dependent},
    }
    rows = []
    if model.dim <= CSV_LISTING_DIM:
        masks = np.concatenate(list(iter_all_masks(model.dim)))
        vals = CutEvaluator(H, s, d).evaluate(masks)
        ok = vals["admissible"]
        for i in np.flatnonzero(ok):
            rows.append([f"code:{i + 1}", str(int(masks[i].sum()))] + [_g17(vals[k][i]) for k in (
                "pi_S", "pi_boundary", "conductance", "bound_thm1", "bound_thm3")] + [_g17(s.gap)]
                + [_g17(vals["slack_thm1"][i]), _g17(vals["slack_thm3"][i])])
        tol = -1e-9 * s.spectral_diameter
        checks["exhaustive_thm1"] = bool(np.all(vals["slack_thm1"][ok] >= tol))
        checks["exhaustive_thm3"] = bool(np.all(vals["slack_thm3"][ok] >= tol))
        summary["exhaustive"] = {"subsets": int(ok.sum()),
                                 "min_slack_thm1": float(vals["slack_thm1"][ok].min()),
                                 "min_slack_thm3": float(vals["slack_thm3"][ok].min())}
    designated = {}
    for family in model.cut_families:
        try:
            subsets = model.cuts(family, d)
        except (ValueError, KeyError) as exc:
            designated[family] = {"error": str(exc)}
            continue
        reps = []
        for j, sub in enumerate(subsets):
            try:
                rep = cut_report(H, s, d, sub, label=family)
            except GeometryError as exc:
                reps.append({"error": str(exc)})
                continue
            reps.append(_report_dict(rep))
            rows.append(rep.csv_row(f"{family}:{j}"))
            checks[f"{family}:{j}"] = rep.holds_thm1 and rep.holds_thm3
        designated[family] = reps
    summary["designated_cuts"] = designated
    incumbents, search_rows = _search_all(model, H, s, d, cfg)
    rows += search_rows
    for key, inc in incumbents.items():
        if "error" not in inc:
            checks[f"search:{key}"] = inc["holds_thm1"] and inc["holds_thm3"]
    summary["search"] = incumbents
    try:
        summary["projector"] = _projector_report(model, H, s, d)
    except ProjectorError as exc:
        summary["projector"] = {"applicable": False, "reason": str(exc)}
    cands = _violation_candidates(model)
    if cands is not None and not d.basis_dependent:
        try:
            summary["naive_cheeger"] = naive_cheeger_violation(H, s, d, cands).to_dict()
        except GeometryError as exc:
            summary["naive_cheeger"] = {"error": str(exc)}
    summary["checks"] = checks
    summary["all_checks_pass"] = all(checks.values())
    _write_json(out / "summary.json", summary)
    _write_csv(out / "cuts.csv", CutReport.CSV_HEADER, rows)
    _write_json(out / "config.json", cfg.to_dict())
    print(f"{model.ref}: gap {s.gap:.6g}, diameter {s.spectral_diameter:.6g}, "
          f"{len(rows)} cut rows, checks {'pass' if summary['all_checks_pass'] else 'FAIL'}")
    return EXIT_OK if summary["all_checks_pass"] else EXIT_CHECK


def parse_grid(items: list[str]) -> list[tuple[str, list]]:
    """``key=a,b,c`` or ``key=start:stop[:step]`` (inclusive integer range)."""
    axes = []
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or not val:
            raise HamiltonianError(f"bad grid axis {item!r}; use key=v1,v2 or key=start:stop[:step]")
        if ":" in val:
            parts = [int(p) for p in val.split(":")]
            if len(parts) not in (2, 3):
                raise HamiltonianError(f"bad range {val!r}")
            step = parts[2] if len(parts) == 3 else 1
            values = list(range(parts[0], parts[1] + 1, step))
        else:
            values = [v.strip() for v in val.split(",") if v.strip()]
        axes.append((key.strip(), values))
    return axes


SERIES_HEADER = (
    "point", "params", "dim", "gap", "log_gap", "min_expansion", "min_conductance_ratio",
    "bound_thm1", "bound_thm3", "designated_bound_thm3", "bound_thm3_times_param", "thm4_lower", "error",
)


def _with_params(ref: str, updates: dict) -> str:
    name, _, args = ref.partition(":")
    params = dict(a.split("=", 1) for a in args.split(",") if a.strip())
    params.update({k: str(v) for k, v in updates.items()})
    return name + ":" + ",".join(f"{k}={v}" for k, v in params.items())


def _sweep_point(job) -> list[str]:
    idx, ref, point, cfg_dict = job
    cfg = RunConfig.from_dict(cfg_dict)
    params = ";".join(f"{k}={v}" for k, v in point.items())
    row = [str(idx), params]
    try:
        model = parse_model(ref)
        H, s, d = _solve(model, cfg)
        best_e = best_c = None
        for strategy in _strategies_for(model, cfg.strategy):
            conf = CutSearchConfig(strategy, cfg.max_subsets, cfg.seed)
            for objective in ("expansion", "conductance"):
                try:
                    rep = search(H, s, d, conf, objective)
                except (CutSearchError, GeometryError):
                    continue
                if objective == "expansion" and (best_e is None or rep.expansion < best_e.expansion):
                    best_e = rep
                if objective == "conductance" and (best_c is None or rep.bound_thm3 < best_c.bound_thm3):
                    best_c = rep
        designated = None
        for family in model.cut_families:
            try:
                for sub in model.cuts(family, d):
                    b = cut_report(H, s, d, sub).bound_thm3
                    designated = b if designated is None else min(designated, b)
            except (ValueError, KeyError):
                continue
        thm4 = None
        if best_e is not None and is_stoquastic(H) and is_irreducible(H):
            thm4 = cheeger_prefactor(s, H) * best_e.expansion**2
        scaled = None
        if len(point) == 1 and best_c is not None:
            (val,) = point.values()
            try:
                target = designated if designated is not None else best_c.bound_thm3
                scaled = target * float(val)
            except ValueError:
                scaled = None
        row += [
            _g17(model.dim), _g17(s.gap), _g17(np.log(s.gap) if s.gap > 0 else float("-inf")),
            _g17(best_e.expansion if best_e else None), _g17(best_c.bound_thm3 if best_c else None),
            _g17(best_e.bound_thm1 if best_e else None), _g17(best_c.bound_thm3 if best_c else None),
            _g17(designated), _g17(scaled), _g17(thm4), "",
        ]
    except (HamiltonianError, SolverError, DegenerateGroundStateError, GeometryError, ProjectorError) as exc:
        row += [""] * (len(SERIES_HEADER) - 3) + [f"{type(exc).__name__}: {exc}"]
    return row


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.model:
        raise HamiltonianError("sweep needs --model (grid values are substituted into the model reference)")
    axes = parse_grid(cfg.grid)
    if not axes:
        raise HamiltonianError("sweep needs at least one --grid axis")
    keys = [k for k, _ in axes]
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in axes))]
    jobs = [(i, _with_params(cfg.model, p), p, cfg.to_dict()) for i, p in enumerate(points)]
    parse_model(jobs[0][1])  # fail fast on a malformed reference
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    out = Path(cfg.out)
    _write_csv(out / "series.csv", SERIES_HEADER, rows)
    gaps = [(i, float(r[3])) for i, r in enumerate(rows) if r[3] not in ("",)]
    fit = None
    if len(gaps) >= 2 and len(keys) == 1 and all(g > 0 for _, g in gaps):
        try:
            xs = [float(points[i][keys[0]]) for i, _ in gaps]
            fit = acceptance.linear_fit(xs, [np.log(g) for _, g in gaps])
        except ValueError:
            fit = None
    _write_json(out / "summary.json", {"config": cfg.to_dict(), "points": len(rows),
                                      "failed_points": sum(1 for r in rows if r[-1]), "fit_log_gap": fit})
    _write_json(out / "config.json", cfg.to_dict())
    print(f"sweep: {len(rows)} points written to {out / 'series.csv'}")
    return EXIT_OK


def cmd_search_cuts(cfg: RunConfig) -> int:
    model = _load_model(cfg)
    H, s, d = _solve(model, cfg)
    incumbents, rows = _search_all(model, H, s, d, cfg)
    out = Path(cfg.out)
    _write_csv(out / "cuts.csv", CutReport.CSV_HEADER, rows)
    _write_json(out / "summary.json", {"config": cfg.to_dict(), "model": model.ref, "gap": s.gap,
                                      "incumbents": incumbents})
    _write_json(out / "config.json", cfg.to_dict())
    for key, inc in incumbents.items():
        if "error" in inc:
            print(f"{key}: {inc['error']}")
        else:
            print(f"{key}: expansion {inc['expansion']:.6g}, thm3 ratio {inc['bound_thm3']:.6g}, size {inc['size']}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = acceptance.run_all(cfg.seed, only=cfg.only or None, echo=print)
    out = Path(cfg.out)
    _write_json(out / "verify.json", {
        "seed": cfg.seed,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    })
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    found = False
    if (out / "verify.json").exists():
        found = True
        data = json.loads((out / "verify.json").read_text())
        for c in data["criteria"]:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"[{status}] {c['criterion']:>2}. {c['title']}")
            for f in c["failures"]:
                print(f"       - {f}")
    if (out / "summary.json").exists():
        found = True
        data = json.loads((out / "summary.json").read_text())
        if "spectrum" in data:
            sp = data["spectrum"]
            print(f"model {data['model']['ref']}: E0 {sp['energies'][0]:.6g}, gap {sp['gap']:.6g}, "
                  f"diameter {sp['spectral_diameter']:.6g}, checks {'pass' if data['all_checks_pass'] else 'FAIL'}")
        elif "incumbents" in data:
            for key, inc in data["incumbents"].items():
                print(f"{key}: {inc.get('expansion', inc.get('error'))}")
    if (out / "series.csv").exists():
        found = True
        with (out / "series.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        print(f"series: {len(rows)} points")
        for r in rows:
            print(f"  {r['params']:<24} gap {r['gap'] or '-':<24} min expansion {r['min_expansion'] or '-'}")
    if not found:
        print(f"no outputs found in {out}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "search-cuts": cmd_search_cuts,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamgeom", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="re-run a saved config.json")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--out", default="out", help="output directory")
        c.add_argument("--seed", type=int, default=0)
        if name in ("analyze", "sweep", "search-cuts"):
            c.add_argument("--model", help="model reference, e.g. tim:n=8,gamma=0.5,alpha=1.0,ring=true")
            c.add_argument("--spec-file", help="JSON Hamiltonian spec")
            c.add_argument("--k", type=int, default=5, help="number of excited levels to compute")
            c.add_argument("--dense-cutoff", type=int, default=DENSE_CUTOFF)
            c.add_argument("--strategy", default="auto", choices=("auto", "all") + STRATEGIES)
            c.add_argument("--max-subsets", type=int, default=10_000)
        if name == "sweep":
            c.add_argument("--grid", action="append", default=[], help="key=v1,v2 or key=start:stop[:step]")
            c.add_argument("--workers", type=int, default=1)
        if name == "verify":
            c.add_argument("--only", type=lambda v: [int(x) for x in v.split(",")], default=[],
                           help="comma-separated criterion numbers")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            cfg = RunConfig.from_dict(json.loads(Path(args.config).read_text()))
        elif args.command is None:
            build_parser().print_help()
            return EXIT_SPEC
        else:
            fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
            cfg = RunConfig(**fields)
        return COMMANDS[cfg.command](cfg)
    except NoOffDiagonalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_OFFDIAG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (HamiltonianError, CutSearchError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except DegenerateGroundStateError as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
