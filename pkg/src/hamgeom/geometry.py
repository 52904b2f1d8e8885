"""Isoperimetric quantities of a ground-state distribution.

Given a Hamiltonian ``H``, its spectral summary and ground distribution
``pi``, this module evaluates interior boundaries, vertex expansion
``pi(dS)/pi(S)`` and the Hamiltonian conductance ``-Re <psi|1_S H 1_Sc|psi>``
of basis subsets, and checks the resulting spectral-gap upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hamiltonian import DROP_TOL, LabelScheme, SparseHermitian
from .spectra import GroundDistribution, SpectralSummary

IMAG_TOL = 1e-10
SLACK_RTOL = 1e-9


class GeometryError(ValueError):
    """A subset or subset family violates a bound's preconditions."""


@dataclass(frozen=True)
class Subset:
    """A set of basis indices; labels are converted through a scheme."""

    members: frozenset

    def __init__(self, members: Iterable[int]):
        object.__setattr__(self, "members", frozenset(int(m) for m in members))

    @classmethod
    def from_labels(cls, scheme: LabelScheme, labels: Iterable) -> "Subset":
        return cls(scheme.to_index(lab) for lab in labels)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Subset":
        return cls(np.flatnonzero(mask))

    def mask(self, dim: int) -> np.ndarray:
        m = np.zeros(dim, dtype=bool)
        if self.members:
            m[list(self.members)] = True
        return m

    def complement(self, dim: int) -> "Subset":
        return Subset(set(range(dim)) - self.members)

    def labels(self, scheme: LabelScheme) -> set:
        return {scheme.to_label(i) for i in self.members}

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, index) -> bool:
        return index in self.members

    def __iter__(self):
        return iter(self.sorted())


@dataclass(frozen=True)
class CutReport:
    subset: Subset
    size: int
    pi_S: float
    pi_boundary: float
    pi_complement: float
    expansion: float
    conductance: float
    gap: float
    spectral_diameter: float
    bound_thm1: float
    bound_thm3: float
    slack_thm1: float
    slack_thm3: float
    swapped: bool = False
    basis_dependent: bool = False
    label: str = field(default="", compare=False)

    @property
    def holds_thm1(self) -> bool:
        return self.slack_thm1 >= -SLACK_RTOL * self.spectral_diameter

    @property
    def holds_thm3(self) -> bool:
        return self.slack_thm3 >= -SLACK_RTOL * self.spectral_diameter

    CSV_HEADER = (
        "subset_id", "size", "pi_S", "pi_boundary", "conductance",
        "bound_thm1", "bound_thm3", "gap", "slack_thm1", "slack_thm3",
    )

    def csv_row(self, subset_id: str) -> list[str]:
        vals = (self.pi_S, self.pi_boundary, self.conductance, self.bound_thm1,
                self.bound_thm3, self.gap, self.slack_thm1, self.slack_thm3)
        return [subset_id, str(self.size)] + [format(v, ".17g") for v in vals]


def as_mask(S, dim: int) -> np.ndarray:
    if isinstance(S, Subset):
        return S.mask(dim)
    mask = np.asarray(S)
    if mask.dtype != bool or mask.shape != (dim,):
        raise GeometryError("subsets must be Subset objects or boolean masks of length dim")
    return mask


def boundary(S, matrix: SparseHermitian) -> Subset:
    """States of ``S`` with a non-zero matrix element into the complement."""
    mask = as_mask(S, matrix.dim)
    outside = matrix.pattern().astype(np.int64) @ (~mask).astype(np.int64)
    return Subset.from_mask(mask & (outside > 0))


def hamiltonian_conductance(matrix: SparseHermitian, psi: np.ndarray, mask: np.ndarray) -> float:
    """``-<psi| 1_S H 1_Sc |psi>``, asserted real to ``IMAG_TOL``."""
    flux = np.vdot(psi[mask], (matrix.matrix @ np.where(mask, 0, psi))[mask])
    if abs(flux.imag) > IMAG_TOL:
        raise GeometryError(f"conductance has imaginary part {flux.imag:.3e}")
    return float(-flux.real)


def _masses(dist: GroundDistribution, mask: np.ndarray) -> tuple[float, float]:
    pi_s = float(dist.pi[mask].sum())
    return pi_s, float(dist.pi[~mask].sum())


def _check_mass(dist: GroundDistribution, pi_s: float, pi_c: float) -> None:
    if pi_s <= dist.threshold:
        raise GeometryError("pi(S) = 0: subset carries no ground-state weight")
    if pi_c <= dist.threshold:
        raise GeometryError("pi(S) = 1: complement carries no ground-state weight")


def cut_report(
    matrix: SparseHermitian,
    summary: SpectralSummary,
    dist: GroundDistribution,
    S,
    swap: bool = True,
    label: str = "",
) -> CutReport:
    """All isoperimetric quantities of ``S`` and both single-cut bounds.

    The expansion bound is evaluated on whichever of ``S`` and its
    complement has ``pi <= 1/2`` (``swapped`` records the choice).
    """
    mask = as_mask(S, matrix.dim)
    pi_s, pi_c = _masses(dist, mask)
    _check_mass(dist, pi_s, pi_c)
    swapped = pi_s > 0.5
    if swapped and not swap:
        raise GeometryError(f"pi(S) = {pi_s:.6g} > 1/2")
    small = ~mask if swapped else mask
    pi_small = pi_c if swapped else pi_s
    pi_bd = float(dist.pi[boundary(small, matrix).mask(matrix.dim)].sum())
    cond = hamiltonian_conductance(matrix, dist.psi, mask)
    diam = summary.spectral_diameter
    gap = summary.gap
    expansion = pi_bd / pi_small
    thm1 = 2.0 * diam * expansion
    thm3 = cond / (pi_s * pi_c)
    subset = S if isinstance(S, Subset) else Subset.from_mask(mask)
    return CutReport(
        subset=subset,
        size=int(mask.sum()),
        pi_S=pi_s,
        pi_boundary=pi_bd,
        pi_complement=pi_c,
        expansion=expansion,
        conductance=cond,
        gap=gap,
        spectral_diameter=diam,
        bound_thm1=thm1,
        bound_thm3=thm3,
        slack_thm1=thm1 - gap,
        slack_thm3=thm3 - gap,
        swapped=swapped,
        basis_dependent=dist.basis_dependent,
        label=label,
    )


def expansion_bound(matrix, summary, dist, S, swap: bool = True, label: str = "") -> CutReport:
    """Vertex-expansion upper bound ``2 (E_max - E_0) pi(dS)/pi(S)`` on the gap."""
    return cut_report(matrix, summary, dist, S, swap=swap, label=label)


def conductance_bound(matrix, summary, dist, S, label: str = "") -> CutReport:
    """Conductance upper bound ``Q(S)/(pi(S) pi(Sc))`` on the gap."""
    return cut_report(matrix, summary, dist, S, swap=True, label=label)


def check_isolated(matrix: SparseHermitian, masks: Sequence) -> None:
    """Raise unless the subsets are pairwise disjoint and pairwise isolated."""
    owner = np.full(matrix.dim, -1, dtype=np.int64)
    for i, S in enumerate(masks):
        m = as_mask(S, matrix.dim)
        if np.any(owner[m] >= 0):
            raise GeometryError(f"subset {i} overlaps subset {int(owner[m][owner[m] >= 0][0])}")
        owner[m] = i
    coo = matrix.offdiag().tocoo()
    big = np.abs(coo.data) > DROP_TOL
    a, b = owner[coo.row[big]], owner[coo.col[big]]
    bad = (a >= 0) & (b >= 0) & (a != b)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise GeometryError(f"subsets {int(a[j])} and {int(b[j])} are not isolated")


@dataclass(frozen=True)
class MultiwayReport:
    k: int
    excitation: float
    expansions: tuple[float, ...]
    conductance_ratios: tuple[float, ...]
    bound_expansion: float
    bound_conductance: float
    binding_index: int
    spectral_diameter: float
    basis_dependent: bool = False

    @property
    def holds_expansion(self) -> bool:
        return self.bound_expansion - self.excitation >= -SLACK_RTOL * self.spectral_diameter

    @property
    def holds_conductance(self) -> bool:
        return self.bound_conductance - self.excitation >= -SLACK_RTOL * self.spectral_diameter

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "excitation": self.excitation,
            "expansions": list(self.expansions),
            "conductance_ratios": list(self.conductance_ratios),
            "bound_expansion": self.bound_expansion,
            "bound_conductance": self.bound_conductance,
            "binding_index": self.binding_index,
            "holds_expansion": self.holds_expansion,
            "holds_conductance": self.holds_conductance,
        }


def multiway_bound(
    matrix: SparseHermitian,
    summary: SpectralSummary,
    dist: GroundDistribution,
    subsets: Sequence,
    k: int | None = None,
) -> MultiwayReport:
    """Bound ``E_k - E_0`` by the worst expansion/conductance of isolated subsets.

    ``k`` defaults to ``len(subsets) - 1``.  A single subset with ``k=1``
    is the pair (S, complement) and reproduces the single-cut bounds.
    """
    masks = [as_mask(S, matrix.dim) for S in subsets]
    if not masks:
        raise GeometryError("need at least one subset")
    k = len(masks) - 1 if k is None else int(k)
    single_pair = len(masks) == 1 and k == 1
    if not single_pair:
        if k + 1 > len(masks):
            raise GeometryError(f"k={k} needs {k + 1} subsets, got {len(masks)}")
        check_isolated(matrix, masks)
    if k >= len(summary.energies):
        raise GeometryError(f"summary holds only {len(summary.energies)} energies; need E_{k}")
    expansions, ratios = [], []
    for m in masks:
        pi_s, pi_c = _masses(dist, m)
        _check_mass(dist, pi_s, pi_c)
        if pi_s > 0.5 and not single_pair:
            raise GeometryError(f"isolated subset has pi(S) = {pi_s:.6g} > 1/2")
        small = ~m if pi_s > 0.5 else m
        pi_bd = float(dist.pi[boundary(small, matrix).mask(matrix.dim)].sum())
        expansions.append(pi_bd / min(pi_s, pi_c))
        ratios.append(hamiltonian_conductance(matrix, dist.psi, m) / (pi_s * pi_c))
    diam = summary.spectral_diameter
    return MultiwayReport(
        k=k,
        excitation=float(summary.energies[k] - summary.energies[0]),
        expansions=tuple(expansions),
        conductance_ratios=tuple(ratios),
        bound_expansion=2.0 * diam * max(expansions),
        bound_conductance=max(ratios),
        binding_index=int(np.argmax(ratios)),
        spectral_diameter=diam,
        basis_dependent=dist.basis_dependent,
    )


def variational_certificate(
    matrix: SparseHermitian, summary: SpectralSummary, dist: GroundDistribution, S
) -> float:
    """Rayleigh quotient of ``pi(Sc) 1_S psi - pi(S) 1_Sc psi``, an upper bound on E_1."""
    mask = as_mask(S, matrix.dim)
    pi_s, pi_c = _masses(dist, mask)
    _check_mass(dist, pi_s, pi_c)
    psi = dist.psi
    phi = np.where(mask, pi_c * psi, -pi_s * psi)
    norm2 = float(np.vdot(phi, phi).real)
    if norm2 < 1e-14:
        raise GeometryError("trial state has vanishing norm")
    overlap = abs(np.vdot(phi, psi))
    if overlap > 1e-10:
        raise GeometryError(f"trial state not orthogonal to ground state (overlap {overlap:.3e})")
    return float(np.vdot(phi, matrix.matrix @ phi).real / norm2)


class CutEvaluator:
    """Vectorized cut quantities for many subsets of one instance.

    ``evaluate`` takes a boolean array of shape ``(m, dim)`` and returns
    per-row masses, boundary mass, conductance and both bounds.  Rows with
    ``pi(S)`` or ``pi(Sc)`` at or below the support threshold get NaN bounds.
    """

    def __init__(self, matrix: SparseHermitian, summary: SpectralSummary, dist: GroundDistribution):
        self.matrix = matrix
        self.summary = summary
        self.dist = dist
        self.dim = matrix.dim
        self.pattern = matrix.pattern().astype(np.float64).tocsr()
        self.H = matrix.matrix
        self.gap = summary.gap
        self.diam = summary.spectral_diameter

    def evaluate(self, masks: np.ndarray) -> dict[str, np.ndarray]:
        S = np.asarray(masks, dtype=bool)
        if S.ndim == 1:
            S = S[None, :]
        pi = self.dist.pi
        psi = self.dist.psi
        Sf = S.astype(np.float64)
        pi_s = Sf @ pi
        pi_c = (~S).astype(np.float64) @ pi
        out_s = (self.pattern @ (~S).T.astype(np.float64)).T > 0
        out_c = (self.pattern @ Sf.T).T > 0
        bd_s = (Sf * out_s) @ pi
        bd_c = ((~S) * out_c).astype(np.float64) @ pi
        outside = np.where(S, 0, psi[None, :])
        flux = np.einsum("md,md->m", np.where(S, psi.conj()[None, :], 0), (self.H @ outside.T).T)
        if np.any(np.abs(flux.imag) > IMAG_TOL):
            raise GeometryError("conductance has a non-negligible imaginary part")
        cond = -flux.real
        ok = (pi_s > self.dist.threshold) & (pi_c > self.dist.threshold)
        swapped = pi_s > 0.5
        pi_small = np.where(swapped, pi_c, pi_s)
        bd_small = np.where(swapped, bd_c, bd_s)
        with np.errstate(divide="ignore", invalid="ignore"):
            expansion = np.where(ok, bd_small / pi_small, np.nan)
            thm3 = np.where(ok, cond / (pi_s * pi_c), np.nan)
        thm1 = 2.0 * self.diam * expansion
        return {
            "pi_S": pi_s,
            "pi_complement": pi_c,
            "pi_boundary": bd_small,
            "pi_boundary_S": bd_s,
            "swapped": swapped,
            "admissible": ok,
            "expansion": expansion,
            "conductance": cond,
            "bound_thm1": thm1,
            "bound_thm3": thm3,
            "slack_thm1": thm1 - self.gap,
            "slack_thm3": thm3 - self.gap,
        }


def all_masks(dim: int, start: int = 1, stop: int | None = None) -> np.ndarray:
    """Boolean masks for integer codes ``start..stop-1`` (bit j = index j)."""
    stop = 2**dim - 1 if stop is None else stop
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(dim, dtype=np.int64)[None, :]) & 1).astype(bool)


def iter_all_masks(dim: int, chunk: int = 1 << 15):
    """Every proper non-empty subset of ``range(dim)`` as chunks of masks."""
    total = 2**dim - 1
    for lo in range(1, total, chunk):
        yield all_masks(dim, lo, min(lo + chunk, total))


def random_masks(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random subsets with a uniformly drawn inclusion density per subset."""
    density = rng.uniform(0.05, 0.95, size=(count, 1))
    masks = rng.random((count, dim)) < density
    empty = ~masks.any(axis=1)
    masks[empty, rng.integers(0, dim, empty.sum())] = True
    full = masks.all(axis=1)
    masks[full, rng.integers(0, dim, full.sum())] = False
    return masks

