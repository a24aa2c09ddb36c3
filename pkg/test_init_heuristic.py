"""
Tests for differential evolution and population-based initialization.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from nmfbench.initializers.heuristic import de_minimize, init_pba
from nmfbench.initializers.random_schemes import init_random, uniform_factor
from nmfbench.schemas import DeConfig
from nmfbench.solvers import nnls_solve, sed_objective


def test_de_config_defaults():
    cfg = DeConfig()
    assert (cfg.population, cfg.weight, cfg.crossover, cfg.generations) == (20, 0.8, 0.9, 200)
    with pytest.raises(ValidationError):
        DeConfig(crossover=1.5)
    with pytest.raises(ValidationError):
        DeConfig(population=4)


def test_de_minimize_interior_minimum():
    cfg = DeConfig(upper=10.0, generations=100)
    y = de_minimize(lambda v: float(((v - 3.0) ** 2).sum()), 1, cfg, seed=0)
    assert abs(y[0] - 3.0) < 1e-2


def test_de_minimize_boundary_minimum():
    cfg = DeConfig(upper=10.0, generations=100)
    y = de_minimize(lambda v: float(((v + 1.0) ** 2).sum()), 1, cfg, seed=0)
    assert 0.0 <= y[0] < 1e-3


def test_de_minimize_best_objective_monotone():
    history = []
    cfg = DeConfig(upper=5.0, generations=50)
    de_minimize(lambda v: float(((v - 1.5) ** 2).sum() + np.sin(5 * v).sum()), 3, cfg,
                seed=4, history=history)
    assert len(history) > 1
    assert all(b <= a for a, b in zip(history, history[1:]))


def test_de_minimize_vectorized_stays_in_bounds():
    cfg = DeConfig(upper=2.0, generations=30)
    y = de_minimize(lambda c: ((c - 1.0) ** 2).sum(axis=0), 4, cfg, seed=1, vectorized=True)
    assert np.all((y >= 0.0) & (y <= 2.0))


def test_init_pba_is_seeded_and_non_negative(rng):
    x = rng.random((5, 4))
    cfg = DeConfig(generations=40)
    first, second = init_pba(x, 2, cfg, seed=3), init_pba(x, 2, cfg, seed=3)
    assert np.array_equal(first.w, second.w)
    assert np.array_equal(first.h, second.h)
    assert np.all(first.w >= 0) and np.all(first.h >= 0)
    assert first.origin.name == "pba"


def test_init_pba_zero_row(rng):
    x = rng.random((4, 5))
    x[1] = 0.0
    pair = init_pba(x, 2, DeConfig(generations=150), seed=0)
    assert np.all(np.abs(pair.w[1]) <= 1e-6)


def test_init_pba_beats_random(rng):
    wins = 0
    cfg = DeConfig(generations=60)
    for seed in range(20):
        x = rng.random((5, 4))
        pba = init_pba(x, 2, cfg, seed=seed)
        random = init_random(5, 4, 2, seed=seed)
        if sed_objective(x, pba.w, pba.h) <= sed_objective(x, random.w, random.h):
            wins += 1
    assert wins >= 18


def test_init_pba_rows_match_nnls_optimum(rng):
    # Box well beyond max(X) so the unbounded NNLS optimum is reachable
    cfg = DeConfig(upper=5.0)
    for seed in range(10):
        x = rng.random((8, 6))
        pair = init_pba(x, 3, cfg, seed=seed)
        h0 = uniform_factor(np.random.default_rng([seed, 2]), (3, 6))
        for i in range(8):
            optimum = np.linalg.norm(x[i] - nnls_solve(h0.T, x[i]) @ h0)
            fitted = np.linalg.norm(x[i] - pair.w[i] @ h0)
            assert fitted <= 1.05 * optimum + 1e-9, (seed, i)
