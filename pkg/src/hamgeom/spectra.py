"""Low-lying spectra and ground-state probability distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .hamiltonian import DIM_CAP, HamiltonianError, LabelScheme, SparseHermitian

DENSE_CUTOFF = 4096
DEGENERACY_TOL = 1e-10
SUPPORT_THRESHOLD = 1e-14
RESIDUAL_TOL = 1e-8


class SolverError(RuntimeError):
    """The eigensolver failed to produce a certified result."""


class DegenerateGroundStateError(ValueError):
    """A ground-state distribution was requested for a degenerate ground space."""


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    energies: np.ndarray
    ground: np.ndarray
    e_max: float
    degenerate: bool
    solver: str
    vectors: np.ndarray | None = None
    residual: float = 0.0

    @property
    def e0(self) -> float:
        return float(self.energies[0])

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def spectral_diameter(self) -> float:
        return float(self.e_max - self.energies[0])

    def to_dict(self) -> dict:
        return {
            "energies": [float(e) for e in self.energies],
            "e_max": float(self.e_max),
            "gap": self.gap,
            "spectral_diameter": self.spectral_diameter,
            "degenerate": bool(self.degenerate),
            "solver": self.solver,
            "residual": float(self.residual),
        }


@dataclass(frozen=True, eq=False)
class GroundDistribution:
    """``pi[z] = |psi_z|^2`` over basis indices, with the support mask."""

    pi: np.ndarray
    psi: np.ndarray
    support: np.ndarray
    threshold: float
    scheme: LabelScheme
    basis_dependent: bool = False

    def prob(self, label) -> float:
        return float(self.pi[self.scheme.to_index(label)])

    def as_dict(self) -> dict:
        return {self.scheme.to_label(i): float(p) for i, p in enumerate(self.pi)}

    def support_labels(self) -> set:
        return {self.scheme.to_label(int(i)) for i in np.flatnonzero(self.support)}

    @property
    def full_support(self) -> bool:
        return bool(self.support.all())


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    i = int(np.argmax(np.abs(v)))
    out = v * (abs(v[i]) / v[i])
    out[i] = abs(v[i])
    return out


def _degenerate(energies: np.ndarray, e_max: float) -> bool:
    if len(energies) < 2:
        return False
    diam = e_max - energies[0]
    return bool(energies[1] - energies[0] < DEGENERACY_TOL * max(1.0, diam))


def _dense(matrix: SparseHermitian, k: int):
    a = matrix.toarray()
    if matrix.is_real:
        a = a.real
    w, v = np.linalg.eigh(a)
    return w[: k + 1], v[:, : k + 1], float(w[-1])


def _iterative(matrix: SparseHermitian, k: int, seed: int):
    a = matrix.matrix
    if matrix.is_real:
        a = a.real.tocsr()
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(matrix.dim)
    if not matrix.is_real:
        v0 = v0 + 1j * rng.standard_normal(matrix.dim)
    nev = k + 1
    ncv = min(matrix.dim, max(2 * nev + 1, 20))
    maxiter = 100 * max(k, 1)
    try:
        w, v = spla.eigsh(a, k=nev, which="SA", v0=v0, ncv=ncv, maxiter=maxiter, tol=1e-13)
        top = spla.eigsh(a, k=1, which="LA", v0=v0, ncv=min(matrix.dim, 20), maxiter=maxiter, tol=1e-13,
                         return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise SolverError(f"iterative eigensolver did not converge within {maxiter} restarts") from exc
    order = np.argsort(w)
    return w[order], v[:, order], float(top[0])


def eigensolve(
    matrix: SparseHermitian,
    k: int = 1,
    dense_cutoff: int = DENSE_CUTOFF,
    seed: int = 0,
    dim_cap: int = DIM_CAP,
) -> SpectralSummary:
    """Lowest ``k+1`` eigenpairs plus the top eigenvalue.

    Dense diagonalization is used up to ``dense_cutoff``; beyond it an
    implicitly restarted Lanczos solver (ARPACK) is used and its ground
    residual is checked.
    """
    dim = matrix.dim
    if not 1 <= k < dim:
        raise ValueError(f"k must satisfy 1 <= k < dim, got k={k}, dim={dim}")
    if dim > dim_cap:
        raise HamiltonianError(f"dimension {dim} exceeds cap {dim_cap}")
    # ARPACK needs nev < dim; tiny problems always go dense
    use_dense = dim <= dense_cutoff or k + 1 >= dim - 1
    if use_dense:
        w, v, e_max = _dense(matrix, k)
        solver = "dense"
    else:
        w, v, e_max = _iterative(matrix, k, seed)
        solver = "iterative"
    vectors = np.column_stack([canonical_phase(v[:, j]) for j in range(v.shape[1])])
    ground = vectors[:, 0]
    e_max = max(e_max, float(w[-1]))
    diam = e_max - float(w[0])
    residual = float(np.linalg.norm(matrix.matrix @ ground - w[0] * ground))
    if residual > RESIDUAL_TOL * max(diam, 1e-300):
        raise SolverError(f"ground residual {residual:.3e} exceeds {RESIDUAL_TOL:g} * diameter")
    return SpectralSummary(
        energies=np.asarray(w, dtype=float),
        ground=ground,
        e_max=e_max,
        degenerate=_degenerate(w, e_max),
        solver=solver,
        vectors=vectors,
        residual=residual,
    )


def symmetry_adapted(psi: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Project ``psi`` onto the even or odd sector of a basis permutation.

    ``perm`` must be an involution of basis indices that commutes with ``H``.
    For a non-degenerate ground state this removes the symmetry-breaking
    rounding error that a tiny gap to the opposite sector amplifies.
    """
    psi = np.asarray(psi, dtype=complex)
    even = psi + psi[perm]
    odd = psi - psi[perm]
    out = even if np.linalg.norm(even) >= np.linalg.norm(odd) else odd
    return canonical_phase(out / np.linalg.norm(out))


def spectral_diameter(summary: SpectralSummary) -> float:
    return summary.spectral_diameter


def ground_distribution(
    summary: SpectralSummary,
    scheme: LabelScheme,
    threshold: float = SUPPORT_THRESHOLD,
    allow_degenerate: bool = False,
    ground_vector: np.ndarray | None = None,
) -> GroundDistribution:
    """Ground-state probabilities ``|psi_z|^2``.

    Degenerate ground spaces are refused unless ``allow_degenerate`` is set;
    the caller may then pass an explicit ``ground_vector`` from the ground
    space, and the result is flagged as basis dependent.
    """
    if summary.degenerate and not allow_degenerate:
        raise DegenerateGroundStateError(
            "ground state is degenerate; pass allow_degenerate=True to pick a vector explicitly"
        )
    psi = summary.ground if ground_vector is None else np.asarray(ground_vector, dtype=complex)
    if psi.shape != (scheme.dim,):
        raise ValueError("ground vector does not match the basis dimension")
    psi = psi / np.linalg.norm(psi)
    pi = np.abs(psi) ** 2
    return GroundDistribution(
        pi=pi,
        psi=psi,
        support=pi > threshold,
        threshold=threshold,
        scheme=scheme,
        basis_dependent=bool(summary.degenerate),
    )
