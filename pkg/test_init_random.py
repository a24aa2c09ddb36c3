"""
Tests for the random-scheme initializers.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from nmfbench.errors import BadQ, BadRank, NotAnImageDataset
from nmfbench.initializers.random_schemes import (
    density_ranking,
    gabor_kernel,
    init_cooccurrence,
    init_gabor,
    init_random,
    init_random_acol,
    init_random_c,
    longest_columns,
)
from nmfbench.schemas import GaborBank


def test_init_random_is_seeded():
    first, second = init_random(5, 4, 2, seed=7), init_random(5, 4, 2, seed=7)
    assert np.array_equal(first.w, second.w)
    assert np.array_equal(first.h, second.h)
    assert first.w.shape == (5, 2) and first.h.shape == (2, 4)
    assert np.all(first.w > 0) and np.all(first.w <= 1)
    assert first.origin.name == "random" and first.origin.seed == 7


def test_init_random_bad_rank():
    with pytest.raises(BadRank):
        init_random(3, 4, 4, seed=0)


def test_random_acol_single_column(rng):
    x = rng.random((5, 6))
    pair = init_random_acol(x, 3, q=1, seed=0)
    for j in range(3):
        assert any(np.array_equal(pair.w[:, j], x[:, k]) for k in range(6))


def test_random_acol_all_columns(rng):
    x = rng.random((5, 6))
    pair = init_random_acol(x, 3, q=6, seed=0)
    assert np.allclose(pair.w, x.mean(axis=1, keepdims=True))


def test_random_acol_sparsity(rng):
    x = rng.random((40, 30)) * (rng.random((40, 30)) < 0.1)
    pair = init_random_acol(x, 4, q=3, seed=1)
    max_column_nnz = np.count_nonzero(x, axis=0).max()
    assert np.count_nonzero(pair.w) <= 3 * max_column_nnz * 4
    for j in range(4):
        assert np.count_nonzero(pair.w[:, j]) <= 3 * max_column_nnz


def test_random_acol_bad_q(rng):
    with pytest.raises(BadQ):
        init_random_acol(rng.random((4, 3)), 2, q=4, seed=0)
    with pytest.raises(BadQ):
        init_random_acol(rng.random((4, 3)), 2, q=0, seed=0)


def test_random_c_picks_longest_column():
    x = np.array([[5.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    pair = init_random_c(x, 1, q=1, pool=1, seed=3)
    assert np.array_equal(pair.w[:, 0], x[:, 0])


def test_random_c_full_pool_matches_acol(rng):
    x = rng.random((5, 6))
    acol = init_random_acol(x, 3, q=2, seed=11)
    random_c = init_random_c(x, 3, q=2, pool=6, seed=11)
    assert np.array_equal(acol.w, random_c.w)
    assert np.array_equal(acol.h, random_c.h)


def test_longest_columns_tie_break():
    assert list(longest_columns(np.ones((3, 5)), 3)) == [0, 1, 2]


def test_random_c_default_pool_and_bad_pool(rng):
    x = rng.random((4, 10))
    assert init_random_c(x, 2, q=2, pool=None, seed=0).w.shape == (4, 2)
    with pytest.raises(BadQ):
        init_random_c(x, 2, q=3, pool=2, seed=0)


def test_cooccurrence_identity():
    pair = init_cooccurrence(np.eye(3), 3, seed=4)
    assert sorted(np.argmax(pair.w, axis=0)) == [0, 1, 2]
    assert np.allclose(np.sort(pair.w, axis=1), np.sort(np.eye(3), axis=1))


def test_cooccurrence_zero_row_ranked_last(rng):
    x = rng.random((4, 6))
    x[2] = 0.0
    assert density_ranking(x @ x.T)[-1] == 2


def test_density_ranking_matches_nnz_oracle(rng):
    x = rng.random((6, 8)) * (rng.random((6, 8)) < 0.4)
    c = x @ x.T
    ranking = density_ranking(c)
    oracle = sorted(range(6), key=lambda j: (-sum(abs(c[i, j]) > 1e-12 for i in range(6)),
                                             -math.sqrt(sum(c[i, j] ** 2 for i in range(6))),
                                             j))
    assert list(ranking) == oracle


def test_gabor_bank_defaults():
    bank = GaborBank()
    assert (bank.scales, bank.orientations) == (5, 8)
    assert bank.sigma == pytest.approx(2 * math.pi)
    assert bank.k_max == pytest.approx(math.pi / 2)
    assert bank.spacing == pytest.approx(math.sqrt(2))
    with pytest.raises(ValidationError):
        GaborBank(window=8)


def test_gabor_kernel_magnitude_is_point_symmetric():
    bank = GaborBank(window=15)
    for mu, v in ((0, 0), (3, 2), (7, 4)):
        magnitude = np.abs(gabor_kernel(bank, mu, v))
        assert magnitude.shape == (15, 15)
        assert np.allclose(magnitude, magnitude[::-1, ::-1])


def test_gabor_kernel_has_no_dc_component():
    bank = GaborBank()
    for mu in range(bank.orientations):
        for v in range(bank.scales):
            total = gabor_kernel(bank, mu, v).sum()
            assert abs(total) <= 1e-6, (mu, v, total)


def test_gabor_kernel_centre_value():
    bank = GaborBank()
    s2 = bank.sigma ** 2
    for mu, v in ((0, 0), (5, 3)):
        kernel = gabor_kernel(bank, mu, v)
        half = kernel.shape[0] // 2
        k2 = (bank.k_max / bank.spacing ** v) ** 2
        centre = kernel[half, half]
        assert centre.imag == 0.0
        assert centre.real == pytest.approx((k2 / s2) * (1.0 - math.exp(-s2 / 2)), rel=1e-12)


def test_gabor_kernel_out_of_bank():
    with pytest.raises(ValueError):
        gabor_kernel(GaborBank(), 8, 0)


def test_gabor_constant_image_falls_back_to_raw_column():
    x = np.full((64, 3), 0.5)
    pair = init_gabor(x, (8, 8), 2, GaborBank(), seed=0)
    assert np.allclose(pair.w, 1.0)


def test_gabor_is_seeded_and_normalized(rng):
    x = rng.random((36, 5))
    first = init_gabor(x, (6, 6), 3, GaborBank(window=7), seed=2)
    second = init_gabor(x, (6, 6), 3, GaborBank(window=7), seed=2)
    assert np.array_equal(first.w, second.w)
    assert np.allclose(first.w.max(axis=0), 1.0)


def test_gabor_requires_image_shape(rng):
    with pytest.raises(NotAnImageDataset):
        init_gabor(rng.random((10, 4)), (3, 3), 2, GaborBank(), seed=0)
    with pytest.raises(NotAnImageDataset):
        init_gabor(rng.random((9, 4)), None, 2, GaborBank(), seed=0)
