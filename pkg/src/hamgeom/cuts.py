"""Searching for subsets with small expansion or small conductance ratio.

Strategies either enumerate every subset (tiny bases only) or generate a
structured candidate family; all candidates are scored with
:class:`~hamgeom.geometry.CutEvaluator` and the incumbent is re-evaluated
with :func:`~hamgeom.geometry.cut_report`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np

from .geometry import (
    CutEvaluator,
    CutReport,
    GeometryError,
    Subset,
    cut_report,
    iter_all_masks,
    random_masks,
)
from .hamiltonian import SparseHermitian
from .spectra import GroundDistribution, SpectralSummary

STRATEGIES = (
    "exhaustive",
    "sweep-amplitude",
    "sweep-diagonal",
    "hamming-ball",
    "magnetization",
    "clock-window",
    "greedy",
    "random",
)
OBJECTIVES = ("expansion", "conductance")
EXHAUSTIVE_CAP = 22
RECHECK_TOL = 1e-12


class CutSearchError(ValueError):
    """Strategy and instance are incompatible."""


@dataclass(frozen=True)
class CutSearchConfig:
    strategy: str = "exhaustive"
    max_subsets: int = 10_000
    seed: int = 0
    chunk: int = 1 << 15

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise CutSearchError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.max_subsets < 1:
            raise CutSearchError("max_subsets must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# -- candidate generators -----------------------------------------------------

def _prefixes(order: np.ndarray) -> np.ndarray:
    d = order.size
    masks = np.zeros((d - 1, d), dtype=bool)
    for j in range(1, d):
        masks[j - 1, order[:j]] = True
    return masks


def _digit_kinds(dist: GroundDistribution) -> bool:
    return dist.scheme.kind in ("bits", "trits", "digits")


def _hamming_balls(dist: GroundDistribution) -> np.ndarray:
    if not _digit_kinds(dist):
        raise CutSearchError("hamming-ball cuts need a product basis of digits")
    digits = dist.scheme.digit_array(np.arange(dist.pi.size))
    center = int(np.argmax(dist.pi))
    dist_to_center = (digits != digits[center]).sum(axis=1)
    radii = range(int(dist_to_center.max()))
    return np.array([dist_to_center <= r for r in radii], dtype=bool)


def _magnetization(dist: GroundDistribution) -> np.ndarray:
    if dist.scheme.kind != "bits":
        raise CutSearchError("magnetization cut needs a qubit basis")
    digits = dist.scheme.digit_array(np.arange(dist.pi.size))
    n = digits.shape[1]
    return (n - 2 * digits.sum(axis=1) < 0)[None, :]


def _clock_windows(dist: GroundDistribution) -> np.ndarray:
    """All windows of a quarter of the clock values, times every bitstring."""
    if dist.scheme.kind != "clocked-bits":
        raise CutSearchError("clock-window cuts need a clocked-bits basis")
    T1 = dist.scheme.site_dims[0]
    block = dist.pi.size // T1
    q = max(1, int(round(T1 / 4)))
    clock = np.arange(dist.pi.size) // block
    return np.array([(clock >= a) & (clock < a + q) for a in range(T1 - q + 1)], dtype=bool)


def _family(strategy: str, matrix: SparseHermitian, dist: GroundDistribution, config: CutSearchConfig) -> Iterator[np.ndarray]:
    d = matrix.dim
    if strategy == "exhaustive":
        if d > EXHAUSTIVE_CAP:
            raise CutSearchError(f"exhaustive search needs dim <= {EXHAUSTIVE_CAP}, got {d}")
        yield from iter_all_masks(d, config.chunk)
    elif strategy == "sweep-amplitude":
        yield _prefixes(np.lexsort((np.arange(d), -dist.pi)))
    elif strategy == "sweep-diagonal":
        yield _prefixes(np.lexsort((np.arange(d), matrix.diagonal())))
    elif strategy == "hamming-ball":
        yield _hamming_balls(dist)
    elif strategy == "magnetization":
        yield _magnetization(dist)
    elif strategy == "clock-window":
        yield _clock_windows(dist)
    elif strategy == "random":
        rng = np.random.default_rng(config.seed)
        left = config.max_subsets
        while left > 0:
            m = min(left, config.chunk)
            yield random_masks(d, m, rng)
            left -= m
    else:  # pragma: no cover - guarded by CutSearchConfig
        raise CutSearchError(strategy)


# -- search ------------------------------------------------------------------

def _scores(vals: dict, objective: str) -> np.ndarray:
    key = "expansion" if objective == "expansion" else "bound_thm3"
    s = np.where(vals["admissible"], vals[key], np.inf)
    return np.where(np.isnan(s), np.inf, s)


def _canonical_key(mask: np.ndarray) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(mask))


@dataclass
class _Incumbent:
    score: float = np.inf
    mask: np.ndarray | None = None
    evaluated: int = 0

    def offer(self, masks: np.ndarray, scores: np.ndarray) -> None:
        self.evaluated += masks.shape[0]
        if not scores.size:
            return
        best = scores.min()
        if not np.isfinite(best) or best > self.score:
            return
        ties = np.flatnonzero(scores == best)
        cand = min((masks[i] for i in ties), key=_canonical_key)
        if best < self.score or _canonical_key(cand) < _canonical_key(self.mask):
            self.score, self.mask = float(best), cand.copy()


def _greedy(ev: CutEvaluator, objective: str, start: np.ndarray, config: CutSearchConfig, inc: _Incumbent) -> None:
    d = start.size
    rng = np.random.default_rng(config.seed)
    current = start.copy()
    score = float(_scores(ev.evaluate(current), objective)[0])
    stale = proposals = 0
    while stale < d and proposals < config.max_subsets:
        for j in rng.permutation(d):
            trial = current.copy()
            trial[j] = ~trial[j]
            proposals += 1
            s = float(_scores(ev.evaluate(trial), objective)[0])
            inc.evaluated += 1
            if s < score:
                current, score, stale = trial, s, 0
            else:
                stale += 1
            if stale >= d or proposals >= config.max_subsets:
                break
    inc.offer(current[None, :], np.array([score]))


def search(
    matrix: SparseHermitian,
    summary: SpectralSummary,
    dist: GroundDistribution,
    config: CutSearchConfig,
    objective: str = "expansion",
) -> CutReport:
    """Best subset under ``objective`` among the strategy's candidates.

    Ties are broken by the sorted tuple of member indices.  The winner is
    reported on its ``pi <= 1/2`` side and re-checked against
    :func:`cut_report`.
    """
    if objective not in OBJECTIVES:
        raise CutSearchError(f"objective must be one of {OBJECTIVES}")
    ev = CutEvaluator(matrix, summary, dist)
    inc = _Incumbent()
    if config.strategy == "greedy":
        for start in ("sweep-amplitude", "sweep-diagonal"):
            for masks in _family(start, matrix, dist, config):
                inc.offer(masks, _scores(ev.evaluate(masks), objective))
        if inc.mask is None:
            raise GeometryError("no admissible starting cut for greedy search")
        _greedy(ev, objective, inc.mask, config, inc)
    else:
        for masks in _family(config.strategy, matrix, dist, config):
            inc.offer(masks, _scores(ev.evaluate(masks), objective))
    if inc.mask is None:
        raise GeometryError(f"strategy {config.strategy!r} produced no admissible subset")
    mask = inc.mask
    if dist.pi[mask].sum() > 0.5:
        mask = ~mask
    report = cut_report(matrix, summary, dist, Subset.from_mask(mask), label=f"{config.strategy}:{objective}")
    recomputed = report.expansion if objective == "expansion" else report.bound_thm3
    if abs(recomputed - inc.score) > RECHECK_TOL * max(1.0, abs(recomputed)):
        raise GeometryError(f"search score {inc.score!r} disagrees with recomputation {recomputed!r}")
    return report


def min_expansion(matrix, summary, dist, config: CutSearchConfig) -> CutReport:
    """Subset minimizing ``pi(dS)/pi(S)`` (small side) for the configured strategy."""
    return search(matrix, summary, dist, config, "expansion")


def min_conductance(matrix, summary, dist, config: CutSearchConfig) -> CutReport:
    """Subset minimizing ``Q(S)/(pi(S) pi(Sc))`` for the configured strategy."""
    return search(matrix, summary, dist, config, "conductance")


def isolated_family(
    matrix: SparseHermitian,
    dist: GroundDistribution,
    config: CutSearchConfig | None = None,
    max_mass: float = 0.5,
    max_count: int | None = None,
) -> list[Subset]:
    """Pairwise disjoint, pairwise isolated subsets, each with ``0 < pi <= max_mass``.

    Each subset is seeded on the heaviest still-available state and grown in
    whole breadth-first layers while its mass stays within ``max_mass``.  Its
    neighbourhood is then removed from availability, leaving a one-layer
    separator between consecutive subsets.
    """
    adj = matrix.pattern().tocsr()
    available = dist.support.copy()
    limit = max_count if max_count is not None else (config.max_subsets if config else matrix.dim)
    out: list[Subset] = []

    def neighbours(mask: np.ndarray) -> np.ndarray:
        return (adj.astype(np.int64) @ mask.astype(np.int64)) > 0

    while available.any() and len(out) < limit:
        cand = np.flatnonzero(available)
        seed = int(cand[np.lexsort((cand, -dist.pi[cand]))[0]])
        S = np.zeros(matrix.dim, dtype=bool)
        S[seed] = True
        if dist.pi[seed] > max_mass:
            available[seed] = False
            continue
        while True:
            layer = neighbours(S) & ~S & available
            if not layer.any() or dist.pi[S | layer].sum() > max_mass:
                break
            S |= layer
        out.append(Subset.from_mask(S))
        available &= ~(S | neighbours(S))
    return out
