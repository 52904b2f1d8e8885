"""Local Hamiltonians: term specifications, basis labels and sparse realization.

A Hamiltonian is a sum of local terms, each either a Pauli string or an
explicit Hermitian block on a tuple of sites.  ``build`` turns a
:class:`HamiltonianSpec` into a :class:`SparseHermitian`, a CSR matrix in the
basis fixed by the HamiltonianSpec label scheme.  Site 0 is the most significant digit
of the basis index.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DROP_TOL = 1e-12
HERMITIAN_TOL = 1e-12
DIM_CAP = 2**20

LABEL_KINDS = ("bits", "trits", "clocked-bits", "ring", "digits")

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianError(ValueError):
    """Invalid Hamiltonian specification or matrix."""


class NoOffDiagonalError(HamiltonianError):
    """The matrix has no off-diagonal structure above the drop tolerance."""


@dataclass(frozen=True)
class LocalTerm:
    """One term ``coeff * O`` acting on ``sites``.

    Exactly one of ``pauli`` (a string over ``IXYZ``, one character per
    listed site) or ``block`` (a square complex matrix on the listed sites)
    is set.  Pauli coefficients must be real.
    """

    sites: tuple[int, ...]
    coeff: complex = 1.0
    pauli: str | None = None
    block: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def pauli_string(cls, ops: str, coeff: float = 1.0, sites: Sequence[int] | None = None) -> "LocalTerm":
        ops = ops.upper()
        if sites is None:
            sites = range(len(ops))
        sites = tuple(int(s) for s in sites)
        if len(sites) != len(ops):
            raise HamiltonianError(f"pauli string {ops!r} does not match sites {sites}")
        if set(ops) - set(_PAULI):
            raise HamiltonianError(f"pauli string {ops!r} has characters outside IXYZ")
        if abs(np.imag(coeff)) > 0:
            raise HamiltonianError("pauli-string coefficients must be real")
        # identity factors are dropped so the term touches only its support
        keep = [(s, c) for s, c in zip(sites, ops) if c != "I"]
        return cls(
            sites=tuple(s for s, _ in keep),
            coeff=float(np.real(coeff)),
            pauli="".join(c for _, c in keep),
        )

    @classmethod
    def dense_block(cls, matrix, sites: Sequence[int], coeff: complex = 1.0) -> "LocalTerm":
        block = np.array(matrix, dtype=complex)
        if block.ndim != 2 or block.shape[0] != block.shape[1]:
            raise HamiltonianError("dense block must be a square matrix")
        full = coeff * block
        if not np.allclose(full, full.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
            raise HamiltonianError(f"dense block on sites {tuple(sites)} is not Hermitian")
        return cls(sites=tuple(int(s) for s in sites), coeff=complex(coeff), block=block)

    def local_matrix(self) -> np.ndarray:
        if self.pauli is not None:
            out = np.ones((1, 1), dtype=complex)
            for c in self.pauli:
                out = np.kron(out, _PAULI[c])
            return self.coeff * out
        return self.coeff * self.block


@dataclass(frozen=True)
class LabelScheme:
    """Bijection between basis indices and human-readable labels.

    ``bits``/``trits``/``digits`` use digit strings, ``clocked-bits`` uses
    ``(t, bitstring)`` with the clock as site 0, ``ring`` uses integer
    positions ``-n..n`` on a single site of dimension ``2n+1``.
    """

    kind: str
    site_dims: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in LABEL_KINDS:
            raise HamiltonianError(f"unknown label scheme {self.kind!r}")
        dims = self.site_dims
        if self.kind == "bits" and any(d != 2 for d in dims):
            raise HamiltonianError("'bits' labels require every site to have dimension 2")
        if self.kind == "trits" and any(d != 3 for d in dims):
            raise HamiltonianError("'trits' labels require every site to have dimension 3")
        if self.kind == "clocked-bits" and (len(dims) < 1 or any(d != 2 for d in dims[1:])):
            raise HamiltonianError("'clocked-bits' labels need a clock site followed by qubits")
        if self.kind == "ring" and (len(dims) != 1 or dims[0] % 2 == 0):
            raise HamiltonianError("'ring' labels need a single site of odd dimension")
        if self.kind == "digits" and any(d > 10 for d in dims):
            raise HamiltonianError("'digits' labels support site dimensions up to 10")

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims, dtype=np.int64))

    def digits(self, index: int) -> list[int]:
        out = []
        for d in reversed(self.site_dims):
            index, r = divmod(index, d)
            out.append(r)
        return out[::-1]

    def digit_array(self, indices) -> np.ndarray:
        """Digits of many indices at once, shape ``(len(indices), n_sites)``."""
        return np.stack(np.unravel_index(np.asarray(indices), self.site_dims), axis=1)

    def to_label(self, index: int):
        if not 0 <= index < self.dim:
            raise HamiltonianError(f"basis index {index} out of range")
        if self.kind == "ring":
            return index - self.site_dims[0] // 2
        digs = self.digits(index)
        if self.kind == "clocked-bits":
            return (digs[0], "".join(map(str, digs[1:])))
        return "".join(map(str, digs))

    def to_index(self, label) -> int:
        try:
            if self.kind == "ring":
                half = self.site_dims[0] // 2
                label = int(label)
                if not -half <= label <= half:
                    raise ValueError
                return label + half
            if self.kind == "clocked-bits":
                t, bits = label
                digs = [int(t)] + [int(c) for c in bits]
            else:
                digs = [int(c) for c in label]
        except (TypeError, ValueError):
            raise HamiltonianError(f"invalid basis label {label!r} for scheme {self.kind!r}") from None
        if len(digs) != len(self.site_dims) or any(not 0 <= g < d for g, d in zip(digs, self.site_dims)):
            raise HamiltonianError(f"invalid basis label {label!r} for scheme {self.kind!r}")
        index = 0
        for g, d in zip(digs, self.site_dims):
            index = index * d + g
        return index

    def labels(self) -> list:
        return [self.to_label(i) for i in range(self.dim)]


@dataclass(frozen=True)
class HamiltonianSpec:
    site_dims: tuple[int, ...]
    terms: tuple[LocalTerm, ...]
    labels: str = "bits"

    def __post_init__(self):
        object.__setattr__(self, "site_dims", tuple(int(d) for d in self.site_dims))
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.site_dims or any(d < 1 for d in self.site_dims):
            raise HamiltonianError("site dimensions must be positive")
        if self.dim < 2:
            raise HamiltonianError("total dimension must be at least 2")
        nsites = len(self.site_dims)
        for term in self.terms:
            if len(set(term.sites)) != len(term.sites):
                raise HamiltonianError(f"term sites {term.sites} are not distinct")
            if any(not 0 <= s < nsites for s in term.sites):
                raise HamiltonianError(f"term sites {term.sites} out of range for {nsites} sites")
            local = [self.site_dims[s] for s in term.sites]
            if term.pauli is not None and any(d != 2 for d in local):
                raise HamiltonianError("pauli terms may only act on dimension-2 sites")
            if term.block is not None and term.block.shape[0] != int(np.prod(local, dtype=np.int64)):
                raise HamiltonianError(f"block shape {term.block.shape} does not match sites {term.sites}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims, dtype=np.int64))

    @property
    def scheme(self) -> LabelScheme:
        return LabelScheme(self.labels, self.site_dims)


@dataclass(frozen=True, eq=False)
class SparseHermitian:
    """Immutable CSR realization of a Hermitian operator in a labelled basis."""

    matrix: sp.csr_matrix
    scheme: LabelScheme

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.scheme.dim, self.scheme.dim):
            raise HamiltonianError("matrix shape does not match label scheme")
        m.data.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.any(self.matrix.data.imag)

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def offdiag(self) -> sp.csr_matrix:
        m = self.matrix.tocoo()
        keep = m.row != m.col
        return sp.csr_matrix((m.data[keep], (m.row[keep], m.col[keep])), shape=m.shape)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def pattern(self) -> sp.csr_matrix:
        """Boolean off-diagonal adjacency pattern."""
        off = self.offdiag()
        return sp.csr_matrix((np.ones(off.nnz, dtype=bool), off.indices, off.indptr), shape=off.shape)

    def neighbors(self, index: int) -> np.ndarray:
        m = self.matrix
        cols = m.indices[m.indptr[index]:m.indptr[index + 1]]
        return np.sort(cols[cols != index])

    def __add__(self, other: "SparseHermitian") -> "SparseHermitian":
        if self.scheme != other.scheme:
            raise HamiltonianError("cannot add matrices in different bases")
        return from_sparse(self.matrix + other.matrix, self.scheme)

    def scaled(self, factor: float) -> "SparseHermitian":
        return from_sparse(self.matrix * float(factor), self.scheme)


def _finalize(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=complex)
    m.sum_duplicates()
    m.data[np.abs(m.data) <= DROP_TOL] = 0
    m.eliminate_zeros()
    m.sort_indices()
    return m


def check_hermitian(m: sp.spmatrix, tol: float = HERMITIAN_TOL) -> float:
    """Return the largest ``|A - A^H|`` entry; raise if it exceeds ``tol``."""
    diff = sp.csr_matrix(m - m.conj().T)
    worst = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    if worst > tol:
        raise HamiltonianError(f"matrix is not Hermitian (max |A - A^H| = {worst:.3e})")
    return worst


def from_sparse(m: sp.spmatrix, scheme: LabelScheme) -> SparseHermitian:
    m = _finalize(m)
    check_hermitian(m)
    return SparseHermitian(m, scheme)


def from_dense(a, labels: str = "bits", site_dims: Sequence[int] | None = None) -> SparseHermitian:
    """Wrap an explicit Hermitian matrix.

    Without ``site_dims`` the dimension must be a power of two for ``bits``
    labels; other schemes should pass their site dimensions.
    """
    a = np.asarray(a, dtype=complex)
    if site_dims is None:
        n = int(round(np.log2(a.shape[0])))
        if labels != "bits" or 2**n != a.shape[0]:
            raise HamiltonianError("site_dims required for this matrix")
        site_dims = (2,) * n
    return from_sparse(sp.csr_matrix(a), LabelScheme(labels, tuple(site_dims)))


def _pauli_coo(term: LocalTerm, n: int, dim: int):
    xmask = zmask = 0
    ny = 0
    for s, c in zip(term.sites, term.pauli):
        bit = 1 << (n - 1 - s)
        if c in "XY":
            xmask |= bit
        if c in "YZ":
            zmask |= bit
        ny += c == "Y"
    cols = np.arange(dim, dtype=np.int64)
    rows = cols ^ xmask
    parity = np.zeros(dim, dtype=np.int64)
    z = cols & zmask
    while np.any(z):
        parity ^= z & 1
        z >>= 1
    vals = term.coeff * (1j**ny) * (1 - 2 * parity)
    return rows, cols, vals.astype(complex)


def _block_coo(term: LocalTerm, site_dims: tuple[int, ...], dim: int):
    strides = np.ones(len(site_dims), dtype=np.int64)
    for i in range(len(site_dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * site_dims[i + 1]
    idx = np.arange(dim, dtype=np.int64)
    local_dims = [site_dims[s] for s in term.sites]
    local = np.zeros(dim, dtype=np.int64)
    for s, d in zip(term.sites, local_dims):
        local = local * d + (idx // strides[s]) % site_dims[s]
    # offset of local index a in the global index
    nloc = int(np.prod(local_dims, dtype=np.int64))
    offsets = np.zeros(nloc, dtype=np.int64)
    for a in range(nloc):
        rem, off = a, 0
        for s, d in zip(reversed(term.sites), reversed(local_dims)):
            rem, g = divmod(rem, d)
            off += g * strides[s]
        offsets[a] = off
    order = np.argsort(local, kind="stable")
    bounds = np.searchsorted(local[order], np.arange(nloc + 1))
    mat = term.local_matrix()
    rows, cols, vals = [], [], []
    for r, c in zip(*np.nonzero(np.abs(mat) > 0)):
        states = order[bounds[c]:bounds[c + 1]]
        cols.append(states)
        rows.append(states + offsets[r] - offsets[c])
        vals.append(np.full(states.size, mat[r, c], dtype=complex))
    if not rows:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, complex)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def build(spec: HamiltonianSpec, dim_cap: int = DIM_CAP) -> SparseHermitian:
    """Realize ``sum(spec.terms)`` as a sparse Hermitian matrix."""
    dim = spec.dim
    if dim > dim_cap:
        raise HamiltonianError(f"dimension {dim} exceeds cap {dim_cap}")
    scheme = spec.scheme
    all_qubits = all(d == 2 for d in spec.site_dims)
    rows, cols, vals = [np.zeros(0, np.int64)], [np.zeros(0, np.int64)], [np.zeros(0, complex)]
    for term in spec.terms:
        if term.pauli is not None and all_qubits:
            r, c, v = _pauli_coo(term, len(spec.site_dims), dim)
        else:
            r, c, v = _block_coo(term, spec.site_dims, dim)
        rows.append(r)
        cols.append(c)
        vals.append(v)
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return from_sparse(m, scheme)


def adjacency(matrix: SparseHermitian, x) -> set:
    """Labels ``y != x`` with ``|H[x, y]|`` above the drop tolerance."""
    scheme = matrix.scheme
    i = scheme.to_index(x)
    return {scheme.to_label(int(j)) for j in matrix.neighbors(i)}


def offdiag_min_magnitude(matrix: SparseHermitian) -> float:
    off = matrix.offdiag()
    if off.nnz == 0:
        raise NoOffDiagonalError("matrix has no off-diagonal structure")
    return float(np.min(np.abs(off.data)))


def is_stoquastic(matrix: SparseHermitian, tol: float = DROP_TOL) -> bool:
    """Off-diagonal entries all real and non-positive."""
    off = matrix.offdiag()
    return bool(np.all(np.abs(off.data.imag) <= tol) and np.all(off.data.real <= tol))


def connected_components(matrix: SparseHermitian) -> list[np.ndarray]:
    """Components of the off-diagonal non-zero pattern, found by BFS."""
    m = matrix.matrix
    seen = np.zeros(matrix.dim, dtype=bool)
    comps = []
    for start in range(matrix.dim):
        if seen[start]:
            continue
        seen[start] = True
        queue, comp = deque([start]), [start]
        while queue:
            x = queue.popleft()
            for y in m.indices[m.indptr[x]:m.indptr[x + 1]]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(int(y))
                    queue.append(y)
        comps.append(np.array(sorted(comp)))
    return comps


def is_irreducible(matrix: SparseHermitian) -> bool:
    return len(connected_components(matrix)) == 1


# -- model-spec files -------------------------------------------------------

_TOP_KEYS = {"sites", "terms", "labels"}
_PAULI_KEYS = {"pauli", "coeff", "sites"}
_BLOCK_KEYS = {"block", "sites", "coeff"}


def _complex_entry(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise HamiltonianError(f"complex entries are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise HamiltonianError(f"invalid matrix entry {v!r}")
    return complex(v)


def spec_from_dict(data: dict) -> HamiltonianSpec:
    """Parse the JSON model-spec format; unknown keys are rejected."""
    try:
        return _spec_from_dict(data)
    except HamiltonianError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise HamiltonianError(f"malformed model spec: {exc}") from exc


def _spec_from_dict(data: dict) -> HamiltonianSpec:
    if not isinstance(data, dict):
        raise HamiltonianError("model spec must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise HamiltonianError(f"unknown keys in model spec: {sorted(unknown)}")
    if "sites" not in data or "terms" not in data:
        raise HamiltonianError("model spec needs 'sites' and 'terms'")
    site_dims = tuple(int(d) for d in data["sites"])
    labels = data.get("labels", "bits")
    terms = []
    for raw in data["terms"]:
        if not isinstance(raw, dict):
            raise HamiltonianError("each term must be an object")
        if "pauli" in raw:
            bad = set(raw) - _PAULI_KEYS
            if bad:
                raise HamiltonianError(f"unknown keys in pauli term: {sorted(bad)}")
            coeff = raw.get("coeff", 1.0)
            if isinstance(coeff, (list, tuple)):
                raise HamiltonianError("pauli-string coefficients must be real")
            terms.append(LocalTerm.pauli_string(raw["pauli"], float(coeff), raw.get("sites")))
        elif "block" in raw:
            bad = set(raw) - _BLOCK_KEYS
            if bad:
                raise HamiltonianError(f"unknown keys in block term: {sorted(bad)}")
            if "sites" not in raw:
                raise HamiltonianError("block terms need 'sites'")
            block = [[_complex_entry(v) for v in row] for row in raw["block"]]
            terms.append(LocalTerm.dense_block(block, raw["sites"], _complex_entry(raw.get("coeff", 1.0))))
        else:
            raise HamiltonianError("each term needs either 'pauli' or 'block'")
    return HamiltonianSpec(site_dims, tuple(terms), labels)


def load_spec(path: str | Path) -> HamiltonianSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def spec_to_dict(spec: HamiltonianSpec) -> dict:
    terms = []
    for t in spec.terms:
        if t.pauli is not None:
            terms.append({"pauli": t.pauli, "coeff": float(np.real(t.coeff)), "sites": list(t.sites)})
        else:
            block = [[[float(v.real), float(v.imag)] for v in row] for row in t.block]
            c = complex(t.coeff)
            terms.append({"block": block, "sites": list(t.sites), "coeff": [c.real, c.imag]})
    return {"sites": list(spec.site_dims), "terms": terms, "labels": spec.labels}


def sum_specs(specs: Iterable[HamiltonianSpec], weights: Iterable[float] | None = None) -> HamiltonianSpec:
    """Concatenate the terms of compatible specs, optionally reweighted."""
    specs = list(specs)
    weights = [1.0] * len(specs) if weights is None else list(weights)
    first = specs[0]
    terms = []
    for s, w in zip(specs, weights):
        if s.site_dims != first.site_dims or s.labels != first.labels:
            raise HamiltonianError("cannot combine specs over different bases")
        for t in s.terms:
            if t.pauli is not None:
                terms.append(LocalTerm(t.sites, t.coeff * w, pauli=t.pauli))
            else:
                terms.append(LocalTerm(t.sites, t.coeff * w, block=t.block))
    return HamiltonianSpec(first.site_dims, tuple(terms), first.labels)
