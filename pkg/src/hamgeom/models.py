"""Example Hamiltonians with their designated cut families.

Every builder is a pure function of its parameters and returns a
:class:`ModelInstance`.  Models are also addressable by reference strings
such as ``tim:n=8,gamma=0.5,alpha=1.0,ring=true``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product
from typing import Callable

import numpy as np
from scipy.stats import unitary_group

from .geometry import Subset
from .hamiltonian import (
    HamiltonianError,
    HamiltonianSpec,
    LocalTerm,
    SparseHermitian,
    build,
    sum_specs,
)
from .spectra import GroundDistribution

CutFamily = Callable[["ModelInstance", "GroundDistribution | None"], list]


@dataclass(frozen=True, eq=False)
class ModelInstance:
    name: str
    spec: HamiltonianSpec
    params: dict
    cut_families: dict = field(default_factory=dict)
    ground_hint: np.ndarray | None = None
    symmetry: np.ndarray | None = None  # basis involution commuting with H

    @cached_property
    def matrix(self) -> SparseHermitian:
        return build(self.spec)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def ref(self) -> str:
        args = ",".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return f"{self.name}:{args}" if args else self.name

    def cuts(self, family: str, dist: GroundDistribution | None = None) -> list[Subset]:
        if family not in self.cut_families:
            raise KeyError(f"model {self.name!r} has no cut family {family!r}")
        return self.cut_families[family](self, dist)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx])


# -- transverse Ising -------------------------------------------------------

def _ising_terms(n: int, gamma: float, alpha: float, ring: bool) -> list[LocalTerm]:
    terms = [LocalTerm.pauli_string("X", -gamma, [i]) for i in range(n)]
    bonds = [(i, i + 1) for i in range(n - 1)]
    if ring and n > 2:
        bonds.append((n - 1, 0))
    terms += [LocalTerm.pauli_string("ZZ", -alpha, b) for b in bonds]
    return terms


def _hamming_ball_family(model: ModelInstance, dist) -> list[Subset]:
    n = model.params["n"]
    w = _hamming_weights(n)
    return [Subset(np.flatnonzero(w <= r)) for r in range(n)]


def _magnetization_cut(model: ModelInstance, dist) -> list[Subset]:
    n = model.params["n"]
    # <z|M|z> = n - 2|z| for M = sum Z_i
    return [Subset(np.flatnonzero(n - 2 * _hamming_weights(n) < 0))]


def transverse_ising(n: int, gamma: float = 1.0, alpha: float = 1.0, ring: bool = True) -> ModelInstance:
    """``H = -gamma sum X_i - alpha sum Z_i Z_{i+1}`` on ``n`` qubits."""
    if n < 1:
        raise HamiltonianError("transverse Ising needs n >= 1")
    spec = HamiltonianSpec((2,) * n, tuple(_ising_terms(n, gamma, alpha, ring)), "bits")
    return ModelInstance(
        "tim",
        spec,
        {"n": n, "gamma": gamma, "alpha": alpha, "ring": ring},
        {"hamming-ball": _hamming_ball_family, "magnetization": _magnetization_cut},
    )


# -- GHZ parent -------------------------------------------------------------

def _ghz_balls(model: ModelInstance, dist) -> list[Subset]:
    """Balls ``B_{jk}`` centred on 0...0, or on 1...1 when the former exceeds 1/2."""
    n, k = model.params["n"], model.params["k_local"]
    w = _hamming_weights(n)
    out = []
    for j in range(1, n // k + 1):
        r = j * k
        ball = w <= r
        if dist is not None and dist.pi[ball].sum() > 0.5:
            ball = w >= n - r
        if ball.all():
            continue
        out.append(Subset(np.flatnonzero(ball)))
    return out


def _ghz_isolated_pair(model: ModelInstance, dist) -> list[Subset]:
    n = model.params["n"]
    w = _hamming_weights(n)
    r = (n - 2) // 2
    return [Subset(np.flatnonzero(w <= r)), Subset(np.flatnonzero(w >= n - r))]


def _ghz_isolated_triple(model: ModelInstance, dist) -> list[Subset]:
    n = model.params["n"]
    w = _hamming_weights(n)
    r = (n - 4) // 2
    if r < 0:
        return []
    mid = (w >= r + 2) & (w <= n - r - 2)
    return [Subset(np.flatnonzero(w <= r)), Subset(np.flatnonzero(mid)), Subset(np.flatnonzero(w >= n - r))]


def ghz_parent(n: int, gamma: float = 0.1, k_local: int = 2, ring: bool = True) -> ModelInstance:
    """Ferromagnetic chain plus weak transverse field; ground state near GHZ.

    ``k_local`` sets the spacing of the Hamming-ball family.  At
    ``gamma = 0`` the ground space is exactly degenerate.
    """
    if n < 2:
        raise HamiltonianError("GHZ parent needs n >= 2")
    spec = HamiltonianSpec((2,) * n, tuple(_ising_terms(n, gamma, 1.0, ring)), "bits")
    return ModelInstance(
        "ghz",
        spec,
        {"n": n, "gamma": gamma, "k_local": k_local, "ring": ring},
        {
            "hamming-ball": _ghz_balls,
            "isolated-pair": _ghz_isolated_pair,
            "isolated-triple": _ghz_isolated_triple,
        },
        symmetry=(2**n - 1) - np.arange(2**n),
    )


def ghz_epsilon(dist: GroundDistribution, n: int) -> float:
    """Ground-state weight outside ``{0...0, 1...1}``."""
    return float(1.0 - dist.pi[0] - dist.pi[2**n - 1])


# -- history states ---------------------------------------------------------

def _check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise HamiltonianError("gate must be a square matrix")
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10):
        raise HamiltonianError("gate is not unitary")


def random_circuit(n_qubits: int, T: int, seed: int = 0) -> list[tuple[np.ndarray, tuple[int, ...]]]:
    """``T`` Haar-random two-qubit gates on random qubit pairs."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(T):
        if n_qubits >= 2:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append((unitary_group.rvs(4, random_state=rng), (int(a), int(b))))
        else:
            gates.append((unitary_group.rvs(2, random_state=rng), (0,)))
    return gates


def history_vector(gates, n_qubits: int) -> np.ndarray:
    """Uniform superposition over t of ``U_t ... U_1 |0^n>`` tensored with ``|t>``."""
    T = len(gates)
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    rows = [state.copy()]
    for u, qubits in gates:
        state = _apply(u, qubits, state, n_qubits)
        rows.append(state.copy())
    return np.concatenate(rows) / np.sqrt(T + 1)


def _apply(u, qubits, state, n):
    psi = state.reshape((2,) * n)
    k = len(qubits)
    psi = np.moveaxis(psi, qubits, range(k))
    shape = psi.shape
    psi = (np.asarray(u) @ psi.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(psi, range(k), qubits).reshape(-1)


def _clock_projector(T: int, a: int, b: int) -> np.ndarray:
    m = np.zeros((T + 1, T + 1), dtype=complex)
    m[a, b] = 1.0
    return m


def _quarter_cut(model: ModelInstance, dist) -> list[Subset]:
    T, n = model.params["T"], model.params["n"]
    q = max(1, int(round((T + 1) / 4)))
    return [Subset(range(q * 2**n))]


def _clock_windows(model: ModelInstance, dist) -> list[Subset]:
    T, n = model.params["T"], model.params["n"]
    w = int(round(T**0.25))
    block = 2**n
    out = []
    i = 1
    while (i + 1) * w - 1 <= T and w >= 2:
        ts = range(i * w + 1, (i + 1) * w)
        out.append(Subset(t * block + x for t in ts for x in range(block)))
        i += 1
    return out


def history_state(gates, n_qubits: int, padding: int = 0, seed: int | None = None, **params) -> ModelInstance:
    """Clock Hamiltonian whose unique ground state is the circuit's history state.

    The clock is an explicit ``(T+1)``-level register on site 0.  ``padding``
    appends identity gates to the circuit.
    """
    gates = [(np.asarray(u, dtype=complex), tuple(int(q) for q in qs)) for u, qs in gates]
    gates += [(np.eye(2, dtype=complex), (0,))] * int(padding)
    for u, qs in gates:
        _check_unitary(u)
        if len(qs) > 2 or u.shape[0] != 2 ** len(qs):
            raise HamiltonianError("gates act on one or two qubits and match their size")
    T = len(gates)
    if T < 1:
        raise HamiltonianError("history state needs at least one gate")
    site_dims = (T + 1,) + (2,) * n_qubits
    one = np.diag([0.0, 1.0]).astype(complex)
    terms = [
        LocalTerm.dense_block(np.kron(_clock_projector(T, 0, 0), one), (0, 1 + i)) for i in range(n_qubits)
    ]
    for t, (u, qs) in enumerate(gates, start=1):
        eye = np.eye(u.shape[0], dtype=complex)
        block = 0.5 * (
            np.kron(_clock_projector(T, t, t), eye)
            + np.kron(_clock_projector(T, t - 1, t - 1), eye)
            - np.kron(_clock_projector(T, t, t - 1), u)
            - np.kron(_clock_projector(T, t - 1, t), u.conj().T)
        )
        terms.append(LocalTerm.dense_block(block, (0,) + tuple(1 + q for q in qs)))
    spec = HamiltonianSpec(site_dims, tuple(terms), "clocked-bits")
    meta = {"n": n_qubits, "T": T, "padding": int(padding)}
    if seed is not None:
        meta["seed"] = seed
    meta.update(params)
    return ModelInstance(
        "history",
        spec,
        meta,
        {"clock-quarter": _quarter_cut, "clock-windows": _clock_windows},
        ground_hint=history_vector(gates, n_qubits),
    )


def random_history_state(n: int = 3, T: int = 8, seed: int = 0, padding: int = 0) -> ModelInstance:
    return history_state(random_circuit(n, T, seed), n, padding=padding, seed=seed)


def identity_history_state(n: int = 1, T: int = 3) -> ModelInstance:
    gates = [(np.eye(2, dtype=complex), (0,))] * T
    return replace(history_state(gates, n), name="identity-history", params={"n": n, "T": T})


# -- Motzkin chain ----------------------------------------------------------

# local states: 0 -> "0", 1 -> "l" (up step), 2 -> "r" (down step)
_MOTZKIN_MOVES = ((1 * 3 + 2, 0), (0 * 3 + 1, 1 * 3 + 0), (0 * 3 + 2, 2 * 3 + 0))


def _motzkin_projector() -> np.ndarray:
    proj = np.zeros((9, 9), dtype=complex)
    for a, b in _MOTZKIN_MOVES:
        v = np.zeros(9)
        v[a], v[b] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        proj += np.outer(v, v)
    return proj


def motzkin_words(n: int) -> list[str]:
    """Motzkin paths of length n as digit strings (1 = up, 2 = down)."""
    out = []
    for word in product("012", repeat=n):
        h = 0
        for c in word:
            h += {"0": 0, "1": 1, "2": -1}[c]
            if h < 0:
                break
        else:
            if h == 0:
                out.append("".join(word))
    return out


def _sweep_amplitude_family(model: ModelInstance, dist) -> list[Subset]:
    if dist is None:
        raise ValueError("sweep-amplitude cuts need a ground distribution")
    order = np.lexsort((np.arange(dist.pi.size), -dist.pi))
    return [Subset(order[:j]) for j in range(1, dist.pi.size)]


def motzkin_chain(n: int) -> ModelInstance:
    """Spin-1 Motzkin chain: boundary penalties plus local move projectors."""
    if n < 2:
        raise HamiltonianError("Motzkin chain needs n >= 2")
    terms = [
        LocalTerm.dense_block(np.diag([0, 0, 1]), (0,)),
        LocalTerm.dense_block(np.diag([0, 1, 0]), (n - 1,)),
    ]
    proj = _motzkin_projector()
    terms += [LocalTerm.dense_block(proj, (j, j + 1)) for j in range(n - 1)]
    return ModelInstance(
        "motzkin",
        HamiltonianSpec((3,) * n, tuple(terms), "trits"),
        {"n": n},
        {"sweep-amplitude": _sweep_amplitude_family},
    )


# -- ring counterexample ----------------------------------------------------

def ring_arcs(N: int) -> np.ndarray:
    """Masks of every contiguous proper arc of a ring with N sites."""
    masks = []
    for start in range(N):
        for length in range(1, N):
            m = np.zeros(N, dtype=bool)
            m[(start + np.arange(length)) % N] = True
            masks.append(m)
    return np.array(masks)


def _arc_family(model: ModelInstance, dist) -> list[Subset]:
    return [Subset.from_mask(m) for m in ring_arcs(model.dim)]


def ring_matrix(n: int, perturbed: bool) -> np.ndarray:
    N = 2 * n + 1
    h = np.eye(N, dtype=complex)
    for i in range(N):
        j = (i + 1) % N
        h[i, j] += 0.5
        h[j, i] += 0.5
    if perturbed:
        # labels -n and n-1 sit at indices 0 and 2n-1
        h[0, 2 * n - 1] += 2.0**-n
        h[2 * n - 1, 0] += 2.0**-n
    return h


def momentum_state(n: int, k: int) -> np.ndarray:
    N = 2 * n + 1
    j = np.arange(-n, n + 1)
    return np.exp(2j * np.pi * j * k / N) / np.sqrt(N)


def ring_counterexample(n: int, perturbed: bool = True) -> ModelInstance:
    """Particle hopping on a ring of ``2n+1`` sites, optionally with the 2^-n chord."""
    if n < 2:
        raise HamiltonianError("ring model needs n >= 2")
    spec = HamiltonianSpec((2 * n + 1,), (LocalTerm.dense_block(ring_matrix(n, perturbed), (0,)),), "ring")
    return ModelInstance(
        "ring",
        spec,
        {"n": n, "perturbed": perturbed},
        {"arc": _arc_family},
        ground_hint=None if perturbed else momentum_state(n, n),
    )


def ring_energies(n: int) -> np.ndarray:
    k = np.arange(-n, n + 1)
    return np.sort(1 + np.cos(2 * np.pi * k / (2 * n + 1)))


# -- adiabatic path ---------------------------------------------------------

def transverse_driver(n: int) -> HamiltonianSpec:
    """``sum_i (I - X_i)/2``."""
    terms = []
    for i in range(n):
        terms.append(LocalTerm.pauli_string("I", 0.5, [i]))
        terms.append(LocalTerm.pauli_string("X", -0.5, [i]))
    return HamiltonianSpec((2,) * n, tuple(terms), "bits")


def diagonal_problem(costs) -> HamiltonianSpec:
    """``sum_z f(z) |z><z|`` from a cost vector of length 2^n."""
    costs = np.asarray(costs, dtype=float)
    n = int(round(np.log2(costs.size)))
    if 2**n != costs.size:
        raise HamiltonianError("cost vector length must be a power of two")
    return HamiltonianSpec((2,) * n, (LocalTerm.dense_block(np.diag(costs), tuple(range(n))),), "bits")


def random_costs(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 1.0, 2**n)


def adiabatic_path(driver: HamiltonianSpec, problem: HamiltonianSpec, s: float, **params) -> ModelInstance:
    """``(1 - s) driver + s problem``."""
    if not 0.0 <= s <= 1.0:
        raise HamiltonianError("s must lie in [0, 1]")
    if driver.site_dims != problem.site_dims or driver.labels != problem.labels:
        raise HamiltonianError("driver and problem live in different bases")
    spec = sum_specs([driver, problem], [1.0 - s, s])
    meta = {"s": s}
    meta.update(params)
    families = {}
    if driver.labels == "bits":
        meta.setdefault("n", len(driver.site_dims))
        families = {"hamming-ball": _hamming_ball_family}
    return ModelInstance("adiabatic", spec, meta, families)


def random_adiabatic(n: int, s: float, seed: int = 0) -> ModelInstance:
    return adiabatic_path(transverse_driver(n), diagonal_problem(random_costs(n, seed)), s, n=n, seed=seed)


# -- random and toy models --------------------------------------------------

def random_2local(n: int = 3, seed: int = 0) -> ModelInstance:
    """Gaussian coefficients on every Pauli string of weight one or two."""
    rng = np.random.default_rng(seed)
    terms = []
    for i in range(n):
        for p in "XYZ":
            terms.append(LocalTerm.pauli_string(p, rng.standard_normal(), [i]))
    for i in range(n):
        for j in range(i + 1, n):
            for p in "XYZ":
                for q in "XYZ":
                    terms.append(LocalTerm.pauli_string(p + q, rng.standard_normal(), [i, j]))
    return ModelInstance("random2local", HamiltonianSpec((2,) * n, tuple(terms), "bits"), {"n": n, "seed": seed})


def _block_family(model: ModelInstance, dist) -> list[Subset]:
    return [Subset([0, 1]), Subset([2, 3])]


def block_toy() -> ModelInstance:
    """Two identical decoupled blocks ``{00, 01}`` and ``{10, 11}``."""
    spec = HamiltonianSpec((2, 2), (LocalTerm.pauli_string("X", -1.0, [1]),), "bits")
    return ModelInstance("blocktoy", spec, {}, {"blocks": _block_family}, ground_hint=np.full(4, 0.5, dtype=complex))


# -- registry ---------------------------------------------------------------

def _bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes"):
        return True
    if v.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


_REGISTRY = {
    "tim": (transverse_ising, {"n": int, "gamma": float, "alpha": float, "ring": _bool}),
    "ghz": (ghz_parent, {"n": int, "gamma": float, "k_local": int, "ring": _bool}),
    "history": (random_history_state, {"n": int, "T": int, "seed": int, "padding": int}),
    "identity-history": (identity_history_state, {"n": int, "T": int}),
    "motzkin": (motzkin_chain, {"n": int}),
    "ring": (ring_counterexample, {"n": int, "perturbed": _bool}),
    "adiabatic": (random_adiabatic, {"n": int, "s": float, "seed": int}),
    "random2local": (random_2local, {"n": int, "seed": int}),
    "blocktoy": (block_toy, {}),
}


def model_names() -> list[str]:
    return sorted(_REGISTRY)


def parse_model(ref: str) -> ModelInstance:
    """Build a model from ``name:key=value,...``."""
    name, _, args = ref.partition(":")
    name = name.strip()
    if name not in _REGISTRY:
        raise HamiltonianError(f"unknown model {name!r}; choose from {model_names()}")
    fn, types = _REGISTRY[name]
    kwargs = {}
    for item in filter(None, (a.strip() for a in args.split(","))):
        key, sep, val = item.partition("=")
        if not sep or key not in types:
            raise HamiltonianError(f"bad parameter {item!r} for model {name!r}")
        try:
            kwargs[key] = types[key](val)
        except ValueError as exc:
            raise HamiltonianError(f"bad value for {key!r}: {val!r}") from exc
    try:
        return fn(**kwargs)
    except TypeError as exc:
        raise HamiltonianError(f"model {name!r}: {exc}") from exc


def zoo(max_dim: int | None = None) -> list[ModelInstance]:
    """Small instances of every model family used by the verification suite."""
    models = [
        transverse_ising(3, 1.0, 0.0),
        transverse_ising(4, 0.5, 1.0),
        transverse_ising(4, 1.0, 1.0, ring=False),
        transverse_ising(8, 0.5, 1.0),
        ghz_parent(4, 0.3),
        ghz_parent(6, 0.3),
        motzkin_chain(2),
        motzkin_chain(3),
        motzkin_chain(4),
        motzkin_chain(5),
        identity_history_state(1, 3),
        random_history_state(1, 3, seed=1),
        random_history_state(3, 8, seed=2),
        ring_counterexample(3, True),
        ring_counterexample(4, True),
        ring_counterexample(7, True),
        random_adiabatic(3, 0.5, seed=3),
        random_adiabatic(4, 0.7, seed=4),
        random_2local(3, seed=5),
        random_2local(4, seed=6),
    ]
    if max_dim is not None:
        models = [m for m in models if m.dim <= max_dim]
    return models
