"""Tests for the complex matrix helpers."""

import numpy as np
import pytest

from riscade.complexmat import fro_norm, herm, matmul, unvec, vec
from riscade.errors import ShapeError


def crand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_identity_product(rng):
    a = crand(rng, 2, 3)
    assert np.array_equal(matmul(np.eye(2), a), a)


def test_permutation_product():
    swap = np.array([[0, 1], [1, 0]])
    col = np.array([[2.0 + 1j], [3.0 - 2j]])
    out = matmul(swap, col)
    assert np.array_equal(out, col[::-1])


def test_matches_triple_loop_oracle(rng):
    a = crand(rng, 3, 4)
    b = crand(rng, 4, 2)
    expected = np.zeros((3, 2), dtype=complex)
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    assert np.allclose(matmul(a, b), expected, atol=1e-12)


def test_dimension_mismatch(rng):
    with pytest.raises(ShapeError):
        matmul(crand(rng, 3, 4), crand(rng, 3, 2))


def test_product_conjugate_transpose(rng):
    for _ in range(20):
        a = crand(rng, 3, 5)
        b = crand(rng, 5, 2)
        lhs = herm(matmul(a, b))
        rhs = matmul(herm(b), herm(a))
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_herm_is_involution(rng):
    a = crand(rng, 4, 3)
    assert np.array_equal(herm(herm(a)), a)


def test_fro_norm_definite(rng):
    assert fro_norm(np.zeros((3, 3))) == 0.0
    a = crand(rng, 3, 3)
    assert fro_norm(a) > 0
    assert np.isclose(fro_norm(a), np.sqrt(np.sum(np.abs(a) ** 2)))


def test_vec_is_column_major():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(vec(a), np.array([1, 3, 2, 4], dtype=complex))
    assert np.array_equal(unvec(vec(a), 2, 2), a)


def test_unvec_size_check():
    with pytest.raises(ShapeError):
        unvec(np.zeros(5, dtype=complex), 2, 2)
