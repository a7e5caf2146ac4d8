from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalorder import qmat
from causalorder.errors import DimensionMismatch, NonHermitian, SingularAnchor
from causalorder.randomgen import random_state, random_unitary
from causalorder.strat import identity_choi

I2, SX, SY, SZ = qmat.I2, qmat.SX, qmat.SY, qmat.SZ
PHI = qmat.proj(qmat.bell_phi_plus())
SWAP = qmat.swap_operator()


def rand_herm(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


seeds = st.integers(0, 2**32 - 1)


def test_kron_examples():
    assert np.allclose(qmat.kron(I2, I2), np.eye(4))
    assert np.allclose(qmat.kron(SX, SX), np.fliplr(np.eye(4)))
    assert np.allclose(qmat.kron(SZ, SZ), np.diag([1, -1, -1, 1]))


def test_partial_trace_examples(rng):
    assert np.allclose(qmat.partial_trace(PHI, [2, 2], [0]), I2 / 2)
    a, b = rand_herm(rng, 2), rand_herm(rng, 3)
    assert np.allclose(qmat.partial_trace(np.kron(a, b), [2, 3], [0]), a * np.trace(b))
    assert np.allclose(qmat.partial_trace(SWAP, [2, 2], [1]), I2)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        qmat.partial_trace(np.eye(4), [2, 3], [0])


def test_partial_transpose_examples(rng):
    a, b = rand_herm(rng, 2), rand_herm(rng, 2)
    assert np.allclose(qmat.partial_transpose(np.kron(a, b), [2, 2], 1), np.kron(a, b.T))
    m = rng.normal(size=(6, 6))
    assert np.allclose(qmat.partial_transpose(qmat.partial_transpose(m, [2, 3], 0), [2, 3], 0), m)
    assert np.allclose(qmat.partial_transpose(identity_choi(2), [2, 2], 0), SWAP)


def test_jordan_examples():
    assert np.allclose(qmat.jordan(I2, SX), SX)
    for i, a in enumerate((SX, SY, SZ)):
        for j, b in enumerate((SX, SY, SZ)):
            assert np.allclose(qmat.jordan(a, b), (i == j) * I2)


def test_jordan_inverse_examples(rng):
    r = rand_herm(rng, 4)
    assert np.allclose(qmat.jordan_inverse(np.kron(I2 / 2, I2), r), 2 * r)
    with pytest.raises(SingularAnchor):
        qmat.jordan_inverse(np.diag([1.0, 0.0]), np.eye(2))


def test_herm_eigvals_examples():
    assert np.allclose(qmat.herm_eigvals(SWAP), [-1, 1, 1, 1])
    assert np.allclose(qmat.herm_eigvals(np.diag([3.0, -2.0])), [-2, 3])
    with pytest.raises(NonHermitian):
        qmat.herm_eigvals(np.array([[0, 1], [0, 0]]))


def test_is_psd_examples():
    assert qmat.is_psd(PHI).ok
    r = qmat.is_psd(SWAP)
    assert not r.ok and r.min_eig == pytest.approx(-1)
    r = qmat.is_psd(np.zeros((3, 3)))
    assert r.ok and r.min_eig == 0


def test_matrix_json_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = qmat.matrix_to_json(m)
    assert set(obj) == {"dim", "re", "im"}
    assert np.array_equal(qmat.matrix_from_json(obj), m)
    assert qmat.matrix_to_json(np.eye(2))["im"] == [[0.0, 0.0], [0.0, 0.0]]


@given(seeds)
def test_kron_associative_and_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(qmat.kron(qmat.kron(a, b), c), qmat.kron(a, qmat.kron(b, c)), atol=1e-12)
    assert np.allclose(qmat.kron(a, b) @ qmat.kron(c, d), qmat.kron(a @ c, b @ d), atol=1e-12)


@given(seeds, st.sampled_from([[0], [1], [2], [0, 2], [1, 2], [0, 1, 2], []]))
def test_partial_trace_preserves_trace(seed, keep):
    rng = np.random.default_rng(seed)
    m = rand_herm(rng, 12)
    assert np.trace(qmat.partial_trace(m, [2, 3, 2], keep)) == pytest.approx(np.trace(m), abs=1e-10)


@given(seeds)
def test_jordan_bilinear_symmetric(seed):
    rng = np.random.default_rng(seed)
    x, y, z = (rand_herm(rng, 3) for _ in range(3))
    s, t = rng.normal(size=2)
    assert np.allclose(qmat.jordan(x, y), qmat.jordan(y, x))
    assert np.allclose(qmat.jordan(s * x + t * y, z), s * qmat.jordan(x, z) + t * qmat.jordan(y, z))
    assert np.array_equal(qmat.jordan(x, np.eye(3)), x)


@given(seeds)
def test_jordan_inverse_round_trip(seed):
    rng = np.random.default_rng(seed)
    x = rand_herm(rng, 4)
    m = random_state(rng, 4) + 0.05 * np.eye(4)
    assert np.max(np.abs(qmat.jordan_inverse(m, qmat.jordan(x, m)) - x)) <= 1e-10


@given(seeds)
def test_eigvals_unitary_invariant(seed):
    rng = np.random.default_rng(seed)
    m = rand_herm(rng, 4)
    u = random_unitary(rng, 4)
    assert np.allclose(qmat.herm_eigvals(m), qmat.herm_eigvals(u @ m @ u.conj().T), atol=1e-9)
    assert qmat.herm_eigvals(m).sum() == pytest.approx(np.trace(m).real, abs=1e-9)
