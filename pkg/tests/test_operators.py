import numpy as np
import pytest
from hypothesis import given, strategies as st

from lhscert.operators import (
    PAULIS, Bipartite, DimensionError, alice_operator, conditional_bob, hermitian,
    operator_basis, partial_trace_a, partial_trace_b, random_hermitian, random_state, tensor,
)

dims = st.sampled_from([(2, 2), (3, 2), (2, 3), (4, 2)])
seeds = st.integers(0, 2**31 - 1)


def _loop_trace_a(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for a in range(da):
        for b in range(db):
            for c in range(db):
                out[b, c] += m[a * db + b, a * db + c]
    return out


def _loop_trace_b(m, da, db):
    out = np.zeros((da, da), dtype=complex)
    for a in range(da):
        for c in range(da):
            for b in range(db):
                out[a, c] += m[a * db + b, c * db + b]
    return out


@given(dims, seeds)
def test_partial_traces_match_index_loops(d, seed):
    rng = np.random.default_rng(seed)
    da, db = d
    x = Bipartite(random_hermitian(da * db, rng), da, db)
    assert np.allclose(partial_trace_a(x), _loop_trace_a(x.mat, da, db), atol=1e-12)
    assert np.allclose(partial_trace_b(x), _loop_trace_b(x.mat, da, db), atol=1e-12)


@given(dims, seeds)
def test_conditional_and_alice_operator_agree_with_full_trace(d, seed):
    rng = np.random.default_rng(seed)
    da, db = d
    x = Bipartite(random_hermitian(da * db, rng), da, db)
    e = random_hermitian(da, rng)
    z = random_hermitian(db, rng)
    full = np.trace(x.mat @ np.kron(e, z)).real
    assert np.isclose(np.trace(conditional_bob(x, e) @ z).real, full, atol=1e-10)
    assert np.isclose(np.trace(alice_operator(x, z) @ e).real, full, atol=1e-10)


def test_product_traces():
    a = random_state(3, np.random.default_rng(0))
    b = random_state(2, np.random.default_rng(1))
    x = tensor(a, b)
    assert np.allclose(partial_trace_a(x), b)
    assert np.allclose(partial_trace_b(x), a)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_operator_basis_orthonormal(d):
    b = operator_basis(d)
    g = np.einsum("iab,jba->ij", b.elements, b.elements)
    assert np.allclose(g, np.eye(d * d), atol=1e-12)
    assert np.allclose(b.elements[0], np.eye(d) / np.sqrt(d))
    assert np.allclose(np.trace(b.traceless, axis1=1, axis2=2), 0)


@given(st.sampled_from([2, 3, 6]), seeds)
def test_expand_reconstruct_round_trip(d, seed):
    h = random_hermitian(d, np.random.default_rng(seed))
    b = operator_basis(d)
    assert np.allclose(b.reconstruct(b.expand(h)), h, atol=1e-12)


def test_pauli_algebra():
    x, y, z = PAULIS
    assert np.allclose(x @ y, 1j * z)


def test_hermitian_guard():
    with pytest.raises(ValueError):
        hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        hermitian(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        Bipartite(np.eye(4), 3, 2)


def test_arithmetic_dims_checked():
    with pytest.raises(DimensionError):
        Bipartite(np.eye(4), 2, 2) + Bipartite(np.eye(6), 3, 2)
