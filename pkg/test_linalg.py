"""
Tests for the dense linear-algebra primitives.
"""

import math

import numpy as np
import pytest

from nmfbench.errors import BadRank, EmptySelection, NonFiniteEntry, ZeroMatrix
from nmfbench.linalg import (
    column_2norms,
    dense_matrix,
    frobenius_norm,
    mean_of_columns,
    relative_error,
    truncated_svd,
)


def _scalar_sum_of_squares(a):
    total = 0.0
    for row in a:
        for value in row:
            total += value * value
    return total


def test_dense_matrix_rejects_non_finite():
    with pytest.raises(NonFiniteEntry):
        dense_matrix([[1.0, float("nan")]])
    with pytest.raises(NonFiniteEntry):
        dense_matrix([[float("inf")]])


def test_frobenius_norm_examples(rng):
    assert frobenius_norm(np.array([[3.0, 4.0], [0.0, 0.0]])) == pytest.approx(5.0)
    assert frobenius_norm(np.eye(2)) == pytest.approx(math.sqrt(2))
    a = rng.standard_normal((3, 3))
    assert abs(frobenius_norm(a) - math.sqrt(_scalar_sum_of_squares(a))) <= 1e-12


def test_relative_error_examples(rng):
    w = rng.random((4, 2))
    h = rng.random((2, 3))
    assert relative_error(w @ h, w, h) == 0.0
    assert relative_error(np.array([[1.0]]), np.array([[0.0]]), np.array([[1.0]])) == 1.0

    x = rng.random((4, 3))
    expected = math.sqrt(_scalar_sum_of_squares(x - w @ h)) / math.sqrt(_scalar_sum_of_squares(x))
    assert abs(relative_error(x, w, h) - expected) <= 1e-12


def test_relative_error_zero_data():
    with pytest.raises(ZeroMatrix):
        relative_error(np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 2)))


def test_truncated_svd_diagonal():
    svd = truncated_svd(np.diag([3.0, 1.0]), 1)
    assert svd.sigma == pytest.approx([3.0])
    assert np.allclose(np.abs(svd.u[:, 0]), [1.0, 0.0])
    assert np.allclose(np.abs(svd.v[:, 0]), [1.0, 0.0])


def test_truncated_svd_rank_one(rng):
    a = np.outer(rng.random(5), rng.random(4))
    svd = truncated_svd(a, 2)
    assert svd.sigma[1] <= 1e-8 * svd.sigma[0]


def test_truncated_svd_matches_full_decomposition(rng):
    for _ in range(10):
        a = rng.standard_normal((6, 5))
        svd = truncated_svd(a, 3)
        oracle = np.linalg.svd(a, compute_uv=False)
        assert np.allclose(svd.sigma, oracle[:3], atol=1e-8)
        assert np.linalg.norm(svd.u.T @ svd.u - np.eye(3)) <= 1e-8
        assert np.linalg.norm(svd.v.T @ svd.v - np.eye(3)) <= 1e-8


def test_truncated_svd_eckart_young_residual(rng):
    for _ in range(50):
        a = rng.standard_normal((8, 6))
        p = int(rng.integers(1, 6))
        residual = frobenius_norm(a - truncated_svd(a, p).reconstruct()) ** 2
        sigma = np.linalg.svd(a, compute_uv=False)
        expected = float((sigma[p:] ** 2).sum())
        assert residual == pytest.approx(expected, rel=1e-6, abs=1e-12)


def test_truncated_svd_randomized_path(rng):
    # Above the exact-SVD size limit, with a clear spectral gap
    u, _ = np.linalg.qr(rng.standard_normal((120, 5)))
    v, _ = np.linalg.qr(rng.standard_normal((80, 5)))
    a = (u * np.array([50.0, 20.0, 10.0, 5.0, 2.0])) @ v.T + 1e-6 * rng.standard_normal((120, 80))
    svd = truncated_svd(a, 3)
    assert np.allclose(svd.sigma, [50.0, 20.0, 10.0], rtol=1e-4)
    assert np.linalg.norm(svd.u.T @ svd.u - np.eye(3)) <= 1e-8


def test_truncated_svd_is_deterministic(rng):
    a = rng.random((7, 6))
    first, second = truncated_svd(a, 3), truncated_svd(a, 3)
    assert np.array_equal(first.u, second.u)
    assert np.array_equal(first.v, second.v)


def test_truncated_svd_bad_rank():
    with pytest.raises(BadRank):
        truncated_svd(np.ones((3, 2)), 3)
    with pytest.raises(BadRank):
        truncated_svd(np.ones((3, 2)), 0)


def test_column_2norms_examples(rng):
    assert np.allclose(column_2norms(np.eye(3)), [1.0, 1.0, 1.0])
    assert np.allclose(column_2norms(np.array([[3.0], [4.0]])), [5.0])
    a = rng.standard_normal((4, 4))
    oracle = [math.sqrt(sum(a[i, j] ** 2 for i in range(4))) for j in range(4)]
    assert np.allclose(column_2norms(a), oracle, atol=1e-12)


def test_mean_of_columns_examples(rng):
    a = rng.random((4, 5))
    assert np.array_equal(mean_of_columns(a, [2]), a[:, 2])
    assert np.allclose(mean_of_columns(np.eye(2), [1, 0]), [0.5, 0.5])
    idx = [0, 3, 4]
    oracle = [sum(a[i, j] for j in idx) / 3 for i in range(4)]
    assert np.allclose(mean_of_columns(a, idx), oracle)


def test_mean_of_columns_invalid_selection():
    with pytest.raises(EmptySelection):
        mean_of_columns(np.eye(2), [])
    with pytest.raises(EmptySelection):
        mean_of_columns(np.eye(2), [2])
