import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamgeom.hamiltonian import (
    HamiltonianError,
    HamiltonianSpec,
    LabelScheme,
    LocalTerm,
    NoOffDiagonalError,
    adjacency,
    build,
    connected_components,
    from_dense,
    is_irreducible,
    is_stoquastic,
    load_spec,
    offdiag_min_magnitude,
    spec_from_dict,
    spec_to_dict,
    sum_specs,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_oracle(ops_by_site, n, coeff):
    return coeff * kron_all([PAULI[ops_by_site.get(i, "I")] for i in range(n)])


def embed_oracle(block, sites, site_dims):
    """Embed by explicit index loops; independent of the library's strides."""
    dim = int(np.prod(site_dims))
    local = [site_dims[s] for s in sites]
    t = block.reshape(local + local)
    out = np.zeros((dim, dim), dtype=complex)
    for idx_in in np.ndindex(*site_dims):
        for idx_out_local in np.ndindex(*local):
            idx_out = list(idx_in)
            for s, v in zip(sites, idx_out_local):
                idx_out[s] = v
            amp = t[tuple(idx_out_local) + tuple(idx_in[s] for s in sites)]
            if amp != 0:
                out[np.ravel_multi_index(idx_out, site_dims), np.ravel_multi_index(idx_in, site_dims)] += amp
    return out


def test_single_qubit_minus_x():
    H = build(HamiltonianSpec((2,), (LocalTerm.pauli_string("X", -1.0),)))
    np.testing.assert_array_equal(H.toarray(), -X)


def test_site_zero_is_most_significant():
    H = build(HamiltonianSpec((2, 2), (LocalTerm.pauli_string("Z", 1.0, [0]),)))
    np.testing.assert_array_equal(H.diagonal(), [1, 1, -1, -1])


def test_three_qubit_ising_ring_diagonal():
    terms = [LocalTerm.pauli_string("ZZ", -1.0, b) for b in [(0, 1), (1, 2), (2, 0)]]
    H = build(HamiltonianSpec((2, 2, 2), tuple(terms)))
    assert H.offdiag().nnz == 0
    d = H.diagonal()
    assert d.min() == -3
    assert set(np.flatnonzero(d == -3)) == {0, 7}


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 4),
    data=st.data(),
)
def test_pauli_fast_path_matches_kron(n, data):
    k = data.draw(st.integers(1, n))
    sites = data.draw(st.permutations(range(n)))[:k]
    ops = data.draw(st.text(alphabet="IXYZ", min_size=k, max_size=k))
    coeff = data.draw(st.floats(-3, 3, allow_nan=False))
    H = build(HamiltonianSpec((2,) * n, (LocalTerm.pauli_string(ops, coeff, sites),)))
    want = pauli_oracle(dict(zip(sites, ops)), n, coeff)
    want[np.abs(want) <= 1e-12] = 0
    np.testing.assert_allclose(H.toarray(), want, atol=1e-15)


@pytest.mark.parametrize("site_dims,sites", [((2, 3, 2), (2, 0)), ((3, 3), (1,)), ((2, 2, 2), (1, 2)), ((4, 2), (0, 1))])
def test_dense_block_embedding_matches_oracle(site_dims, sites):
    rng = np.random.default_rng(len(site_dims) + sum(sites))
    m = int(np.prod([site_dims[s] for s in sites]))
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    a = a + a.conj().T
    H = build(HamiltonianSpec(site_dims, (LocalTerm.dense_block(a, sites),), "digits"))
    np.testing.assert_allclose(H.toarray(), embed_oracle(a, sites, site_dims), atol=1e-13)


def test_terms_add_and_tiny_entries_drop():
    terms = (
        LocalTerm.pauli_string("X", 1.0, [0]),
        LocalTerm.pauli_string("X", -1.0, [0]),
        LocalTerm.pauli_string("Z", 1e-14, [1]),
    )
    H = build(HamiltonianSpec((2, 2), terms))
    assert H.matrix.nnz == 0


def test_non_hermitian_block_rejected():
    with pytest.raises(HamiltonianError):
        LocalTerm.dense_block([[0, 1], [0, 0]], (0,))


def test_complex_pauli_coefficient_rejected():
    with pytest.raises(HamiltonianError):
        LocalTerm.pauli_string("X", 1j, [0])


@pytest.mark.parametrize(
    "site_dims,term",
    [
        ((2, 2), LocalTerm.pauli_string("X", 1.0, [2])),
        ((3, 2), LocalTerm.pauli_string("X", 1.0, [0])),
        ((2, 2), LocalTerm(sites=(0, 0), pauli="XX")),
        ((2, 2), LocalTerm.dense_block(np.eye(2), (0, 1))),
    ],
)
def test_invalid_specs(site_dims, term):
    with pytest.raises(HamiltonianError):
        HamiltonianSpec(site_dims, (term,))


def test_dimension_cap():
    spec = HamiltonianSpec((2,) * 5, (LocalTerm.pauli_string("X", 1.0, [0]),))
    with pytest.raises(HamiltonianError):
        build(spec, dim_cap=16)


@pytest.mark.parametrize(
    "kind,site_dims,label",
    [
        ("bits", (2, 2, 2), "101"),
        ("trits", (3, 3), "21"),
        ("clocked-bits", (4, 2, 2), (3, "01")),
        ("ring", (7,), -2),
        ("digits", (5, 3), "42"),
    ],
)
def test_label_round_trip(kind, site_dims, label):
    scheme = LabelScheme(kind, site_dims)
    i = scheme.to_index(label)
    assert scheme.to_label(i) == label
    assert [scheme.to_index(l) for l in scheme.labels()] == list(range(scheme.dim))


def test_ring_labels_are_centred():
    scheme = LabelScheme("ring", (7,))
    assert scheme.labels() == [-3, -2, -1, 0, 1, 2, 3]


def test_bad_labels():
    scheme = LabelScheme("bits", (2, 2))
    for bad in ("102", "1", 5):
        with pytest.raises(HamiltonianError):
            scheme.to_index(bad)


def test_adjacency_and_stoquasticity():
    H = build(HamiltonianSpec((2, 2), (LocalTerm.pauli_string("X", -1.0, [0]), LocalTerm.pauli_string("X", -0.5, [1]))))
    assert adjacency(H, "00") == {"10", "01"}
    assert is_stoquastic(H)
    assert is_irreducible(H)
    assert offdiag_min_magnitude(H) == pytest.approx(0.5)
    Hy = build(HamiltonianSpec((2, 2), (LocalTerm.pauli_string("YY", 1.0, [0, 1]),)))
    assert not is_stoquastic(Hy)
    assert len(connected_components(Hy)) == 2


def test_no_offdiagonal_error():
    H = from_dense(np.diag([0.0, 1.0, 2.0, 3.0]))
    with pytest.raises(NoOffDiagonalError):
        offdiag_min_magnitude(H)


def test_spec_json_round_trip(tmp_path):
    block = np.array([[1.0, 0.5j], [-0.5j, 0.0]])
    spec = HamiltonianSpec((2, 3), (LocalTerm.pauli_string("Z", 0.3, [0]), LocalTerm.dense_block(np.kron(block, np.eye(3)), (0, 1))), "digits")
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    again = load_spec(path)
    np.testing.assert_allclose(build(again).toarray(), build(spec).toarray())


@pytest.mark.parametrize(
    "data",
    [
        {"sites": [2], "terms": [], "extra": 1},
        {"sites": [2], "terms": [{"pauli": "X", "coeff": [1, 0]}]},
        {"sites": [2], "terms": [{"pauli": "X", "bogus": 1}]},
        {"sites": [2], "terms": [{"matrix": [[1]]}]},
        {"sites": ["x"], "terms": []},
        {"terms": []},
    ],
)
def test_spec_parse_errors(data):
    with pytest.raises(HamiltonianError):
        spec_from_dict(data)


def test_sum_specs_weights():
    a = HamiltonianSpec((2,), (LocalTerm.pauli_string("X", 1.0),))
    b = HamiltonianSpec((2,), (LocalTerm.pauli_string("Z", 1.0),))
    H = build(sum_specs([a, b], [0.25, 0.75]))
    np.testing.assert_allclose(H.toarray(), 0.25 * X + 0.75 * Z)
    with pytest.raises(HamiltonianError):
        sum_specs([a, HamiltonianSpec((3,), (), "digits")])
