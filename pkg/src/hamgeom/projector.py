"""The approximate ground-state projector ``P`` and its Markov-like structure.

``G = (E_max - H)/(E_max - E_0)`` has the ground state as its top
eigenvector.  Conjugating ``1_Om G 1_Om`` by the diagonal of ground
amplitudes on the support ``Om`` gives ``P``, whose rows sum to one and which
satisfies a complex detailed-balance condition with respect to ``pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import CutEvaluator, GeometryError, as_mask, boundary
from .hamiltonian import (
    NoOffDiagonalError,
    SparseHermitian,
    is_irreducible,
    is_stoquastic,
    offdiag_min_magnitude,
)
from .spectra import DegenerateGroundStateError, GroundDistribution, SpectralSummary


class ProjectorError(ValueError):
    """Preconditions for building or analysing ``P`` are not met."""


def build_G(summary: SpectralSummary, matrix: SparseHermitian) -> sp.csr_matrix:
    diam = summary.spectral_diameter
    if diam <= 0:
        raise ProjectorError("zero spectral diameter: H is proportional to the identity")
    eye = sp.identity(matrix.dim, dtype=complex, format="csr")
    return sp.csr_matrix((summary.e_max * eye - matrix.matrix) / diam)


@dataclass(frozen=True, eq=False)
class ProjectorOperator:
    P: sp.csr_matrix
    G_omega: sp.csr_matrix
    pi: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    dim: int
    stoquastic: bool
    irreducible: bool
    gamma: float | None

    @property
    def full_support(self) -> bool:
        return self.omega.size == self.dim

    @property
    def dropped(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.dim), self.omega)

    def restrict(self, values: np.ndarray) -> np.ndarray:
        """Values (or a mask) over the full basis restricted to ``Om``."""
        return np.asarray(values)[self.omega]

    def row_sum_error(self) -> float:
        return float(np.max(np.abs(np.asarray(self.P.sum(axis=1)).ravel() - 1.0)))

    def detailed_balance_error(self) -> float:
        flow = sp.diags(self.pi) @ self.P
        return float(abs(flow - flow.conj().T).max()) if flow.nnz else 0.0

    def stationarity_error(self) -> float:
        return float(np.max(np.abs(self.P.T @ self.pi - self.pi)))

    def min_entry(self) -> complex:
        """Entry of ``P`` with the most negative real part."""
        d = self.P.data
        return complex(d[np.argmin(d.real)]) if d.size else 0j

    def p_spectrum(self) -> np.ndarray:
        """Eigenvalues ``p_0 >= p_1 >= ...`` computed from ``1_Om G 1_Om``."""
        a = self.G_omega.toarray()
        if not np.any(a.imag):
            a = a.real
        return np.linalg.eigvalsh(a)[::-1]

    def eigenfunctions(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and right eigenfunctions ``f^k`` of ``P`` (columns)."""
        a = self.G_omega.toarray()
        w, v = np.linalg.eigh(a)
        w, v = w[::-1], v[:, ::-1]
        return w, v / self.psi[:, None]

    @property
    def delta_P(self) -> float:
        p = self.p_spectrum()
        return float(p[0] - p[1]) if p.size > 1 else float("nan")


def build_P(G: sp.spmatrix, dist: GroundDistribution, matrix: SparseHermitian | None = None) -> ProjectorOperator:
    """``P_xy = (psi_y / psi_x) G_xy`` on the support of the ground state."""
    if dist.basis_dependent:
        raise DegenerateGroundStateError("P is undefined for a degenerate ground state")
    omega = np.flatnonzero(dist.support)
    if omega.size == 0:
        raise ProjectorError("empty ground-state support")
    psi = dist.psi[omega]
    G = sp.csr_matrix(G)
    G_om = G[omega][:, omega].tocsr()
    P = (sp.diags(1.0 / psi) @ G_om @ sp.diags(psi)).tocsr()
    stoq = irred = False
    gamma = None
    if matrix is not None:
        stoq = is_stoquastic(matrix)
        irred = is_irreducible(matrix)
        try:
            gamma = offdiag_min_magnitude(matrix)
        except NoOffDiagonalError:
            gamma = None
    return ProjectorOperator(
        P=P,
        G_omega=G_om,
        pi=dist.pi[omega],
        psi=psi,
        omega=omega,
        dim=dist.pi.size,
        stoquastic=stoq,
        irreducible=irred,
        gamma=gamma,
    )


def pi_inner(proj: ProjectorOperator, f: np.ndarray, g: np.ndarray) -> complex:
    return complex(np.sum(proj.pi * np.conj(f) * g))


def dirichlet_form(proj: ProjectorOperator, f: np.ndarray) -> float:
    """``1/2 sum_xy pi_x P_xy |f_x - f_y|^2`` over the support."""
    f = np.asarray(f, dtype=complex)
    P = proj.P.tocoo()
    terms = proj.pi[P.row] * P.data * np.abs(f[P.row] - f[P.col]) ** 2
    return float(0.5 * terms.sum().real)


def energy_form(proj: ProjectorOperator, f: np.ndarray) -> float:
    """``<f, (I - P) f>_pi``."""
    f = np.asarray(f, dtype=complex)
    return float(pi_inner(proj, f, f - proj.P @ f).real)


def variance_form(proj: ProjectorOperator, f: np.ndarray) -> float:
    """``1/2 sum_xy pi_x pi_y |f_x - f_y|^2``, which equals ``<f, f>_pi`` for centered f."""
    f = np.asarray(f, dtype=complex)
    pi = proj.pi
    mean = np.sum(pi * f)
    # expanded form avoids the |Om|^2 pair sum
    return float(np.sum(pi * np.abs(f) ** 2) - abs(mean) ** 2)


def variance_form_pairs(proj: ProjectorOperator, f: np.ndarray) -> float:
    """Pairwise evaluation of the variance; quadratic in ``|Om|``."""
    f = np.asarray(f, dtype=complex)
    diff = np.abs(f[:, None] - f[None, :]) ** 2
    return float(0.5 * proj.pi @ diff @ proj.pi)


def centered(proj: ProjectorOperator, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    return f - np.sum(proj.pi * f)


def indicator_function(proj: ProjectorOperator, S, dim: int | None = None) -> np.ndarray:
    """``r^S``: ``-pi(Sc)`` on S and ``pi(S)`` off it, over the support."""
    mask = proj.restrict(as_mask(S, dim or proj.dim))
    pi_s = float(proj.pi[mask].sum())
    return np.where(mask, -(1.0 - pi_s), pi_s).astype(complex)


def rayleigh_gap(proj: ProjectorOperator, f: np.ndarray) -> float:
    """Dirichlet-to-variance ratio of a centered function; bounded below by Delta_P."""
    f = np.asarray(f, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(f))))
    if abs(np.sum(proj.pi * f)) > 1e-12 * scale:
        raise ProjectorError("rayleigh_gap needs a pi-centered function")
    var = variance_form(proj, f)
    if var <= 1e-300:
        raise ProjectorError("zero variance: f is constant on the support")
    return dirichlet_form(proj, f) / var


@dataclass(frozen=True)
class InterlacingReport:
    ks: tuple[int, ...]
    scaled_excitations: tuple[float, ...]
    one_minus_p: tuple[float, ...]
    max_violation: float
    full_support: bool
    gap_ratio: float
    delta_P: float
    equality_error: float | None

    @property
    def ok(self) -> bool:
        tol = 1e-9
        if self.max_violation > tol:
            return False
        return self.equality_error is None or self.equality_error <= tol

    def to_dict(self) -> dict:
        return {
            "ks": list(self.ks),
            "scaled_excitations": list(self.scaled_excitations),
            "one_minus_p": list(self.one_minus_p),
            "max_violation": self.max_violation,
            "full_support": self.full_support,
            "gap_ratio": self.gap_ratio,
            "delta_P": self.delta_P,
            "equality_error": self.equality_error,
            "ok": self.ok,
        }


def interlacing_check(summary: SpectralSummary, proj: ProjectorOperator, kmax: int = 5) -> InterlacingReport:
    """Compare ``(E_k - E_0)/diam`` with ``1 - p_k``; equal when the support is full."""
    p = proj.p_spectrum()
    diam = summary.spectral_diameter
    top = min(kmax, len(summary.energies) - 1, p.size - 1)
    ks = tuple(range(1, top + 1))
    scaled = tuple(float((summary.energies[k] - summary.energies[0]) / diam) for k in ks)
    omp = tuple(float(p[0] - p[k]) for k in ks)
    viol = max([s - o for s, o in zip(scaled, omp)], default=0.0)
    gap_ratio = summary.gap / diam
    delta_p = float(p[0] - p[1]) if p.size > 1 else float("nan")
    eq = None
    if proj.full_support:
        eq = max([abs(s - o) for s, o in zip(scaled, omp)], default=abs(gap_ratio - delta_p))
    return InterlacingReport(ks, scaled, omp, float(viol), proj.full_support, gap_ratio, delta_p, eq)


def similarity_error(proj: ProjectorOperator) -> float:
    """Largest mismatch between eigenvalues of ``P`` and of ``1_Om G 1_Om``."""
    ev = np.sort(np.linalg.eigvals(proj.P.toarray()).real)[::-1]
    return float(np.max(np.abs(ev - proj.p_spectrum())))


def _shifted_norm(summary: SpectralSummary) -> tuple[float, float]:
    """``(||H||, E)`` under the non-negative-spectrum convention."""
    if summary.e0 < 0:
        return summary.e_max - summary.e0, 0.0
    return summary.e_max, summary.e0


def _require_stoquastic_irreducible(matrix: SparseHermitian) -> None:
    if not is_stoquastic(matrix):
        raise ProjectorError("Hamiltonian is not stoquastic in this basis")
    if not is_irreducible(matrix):
        raise ProjectorError("Hamiltonian is reducible in this basis")


def stoquastic_cheeger_lower(
    summary: SpectralSummary, dist: GroundDistribution, matrix: SparseHermitian, S
) -> float:
    """``Gamma^4 / (2 ||H||^4 (||H|| - E)) * (pi(dS)/pi(S))^2`` for one subset.

    Subsets with ``pi(S) > 1/2`` are replaced by their complement.
    """
    _require_stoquastic_irreducible(matrix)
    mask = as_mask(S, matrix.dim)
    pi_s = float(dist.pi[mask].sum())
    if pi_s > 0.5:
        mask, pi_s = ~mask, 1.0 - pi_s
    if pi_s <= dist.threshold:
        raise GeometryError("pi(S) = 0")
    expansion = float(dist.pi[boundary(mask, matrix).mask(matrix.dim)].sum()) / pi_s
    return cheeger_prefactor(summary, matrix) * expansion**2


def cheeger_prefactor(summary: SpectralSummary, matrix: SparseHermitian) -> float:
    gamma = offdiag_min_magnitude(matrix)
    norm, e = _shifted_norm(summary)
    return gamma**4 / (2.0 * norm**4 * (norm - e))


@dataclass(frozen=True)
class AmplitudeFloor:
    min_ratio: float
    floor: float
    min_transition: float
    transition_floor: float

    @property
    def ok(self) -> bool:
        return self.min_ratio >= self.floor - 1e-12 and self.min_transition >= self.transition_floor - 1e-12


def amplitude_ratio_floor(summary: SpectralSummary, dist: GroundDistribution, matrix: SparseHermitian) -> AmplitudeFloor:
    """Smallest ``psi_y/psi_x`` and ``P_xy`` over Hamiltonian edges, with their floors."""
    _require_stoquastic_irreducible(matrix)
    norm, _ = _shifted_norm(summary)
    gamma = offdiag_min_magnitude(matrix)
    off = matrix.offdiag().tocoo()
    psi = dist.psi.real
    ratios = psi[off.col] / psi[off.row]
    G_xy = -off.data.real / summary.spectral_diameter
    trans = ratios * G_xy
    floor = gamma / norm
    return AmplitudeFloor(float(ratios.min()), floor, float(trans.min()), floor**2)


@dataclass(frozen=True)
class ViolationReport:
    phi: float
    delta_P: float
    factor: float
    gap: float
    best_subset: tuple[int, ...]
    subsets_searched: int

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "delta_P": self.delta_P,
            "violation_factor": self.factor,
            "gap": self.gap,
            "best_subset": list(self.best_subset),
            "subsets_searched": self.subsets_searched,
        }


def naive_cheeger_violation(
    matrix: SparseHermitian,
    summary: SpectralSummary,
    dist: GroundDistribution,
    candidates: np.ndarray,
    delta_P: float | None = None,
) -> ViolationReport:
    """Ratio ``(Phi^2/2)/Delta_P`` with ``Phi`` minimized over candidate masks.

    ``Phi`` uses ``<psi|1_S G 1_Sc|psi>/pi(S)`` over subsets of the support
    with ``0 < pi(S) <= 1/2``.  A factor above one violates the Markov-chain
    Cheeger inequality.
    """
    masks = np.asarray(candidates, dtype=bool) & dist.support[None, :]
    ev = CutEvaluator(matrix, summary, dist)
    vals = ev.evaluate(masks)
    ok = vals["admissible"] & (vals["pi_S"] <= 0.5)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ok, vals["conductance"] / summary.spectral_diameter / vals["pi_S"], np.inf)
    if not np.any(np.isfinite(ratio)):
        raise GeometryError("no admissible candidate subset")
    best = int(np.argmin(ratio))
    phi = float(ratio[best])
    if delta_P is None:
        if dist.full_support:
            delta_P = summary.gap / summary.spectral_diameter
        else:
            G = build_G(summary, matrix)
            omega = np.flatnonzero(dist.support)
            g = G[omega][:, omega].toarray()
            p = np.linalg.eigvalsh(g)[::-1]
            delta_P = float(p[0] - p[1])
    factor = float("inf") if delta_P <= 0 else (phi**2 / 2.0) / delta_P
    return ViolationReport(phi, float(delta_P), factor, summary.gap,
                           tuple(int(i) for i in np.flatnonzero(masks[best])), int(masks.shape[0]))
