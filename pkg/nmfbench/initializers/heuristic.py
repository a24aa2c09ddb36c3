"""
Population-based initialization.

W is fitted row by row against a random H0, then H column by column
against the fitted W, each subproblem solved by a derivative-free
population-based minimizer over the box [0, max(X)]. Differential
evolution (DE/rand/1/bin, scipy's engine) is the minimizer in use; any
callable with the `Minimizer` signature can replace it.
"""

import logging
from typing import Callable, List, Optional, Protocol

import numpy as np
import numpy.typing as npt
from scipy import optimize

from nmfbench.initializers.random_schemes import uniform_factor
from nmfbench.linalg import DenseMatrix, check_rank
from nmfbench.schemas import DeConfig
from nmfbench.solvers import FactorPair, Origin

logger = logging.getLogger(__name__)

Vector = npt.NDArray[np.float64]


class Minimizer(Protocol):
    def __call__(self, objective: Callable, dim: int, cfg: DeConfig, seed,
                 vectorized: bool = False) -> Vector: ...


def de_minimize(objective: Callable, dim: int, cfg: DeConfig, seed,
                vectorized: bool = False,
                history: Optional[List[float]] = None) -> Vector:
    """
    Minimize an objective over [0, upper]^dim with differential evolution.

    Selection is greedy, so the best objective never increases from one
    generation to the next. Trial vectors leaving the box are redrawn
    inside it, keeping the whole population within bounds.

    Args:
        objective: Maps a vector to a real; if vectorized, maps a (dim, S)
            array of S candidates to S reals
        dim: Number of coordinates, >= 1
        cfg: DE settings; cfg.upper bounds every coordinate (1.0 if None)
        seed: Seed or seed sequence for the generator
        vectorized: Evaluate the whole population in one call
        history: If given, receives the best objective after every generation

    Returns:
        ndarray: The best member found, within [0, upper]
    """
    upper = cfg.upper if cfg.upper is not None else 1.0
    rng = np.random.default_rng(seed)
    population = rng.uniform(0.0, upper, size=(cfg.population, dim))

    def record(intermediate_result):
        if history is not None:
            history.append(float(intermediate_result.fun))

    result = optimize.differential_evolution(
        objective,
        bounds=[(0.0, upper)] * dim,
        strategy="rand1bin",
        maxiter=cfg.generations,
        mutation=cfg.weight,
        recombination=cfg.crossover,
        init=population,
        tol=0.0,
        atol=0.0,
        polish=False,
        rng=rng,
        vectorized=vectorized,
        updating="deferred" if vectorized else "immediate",
        callback=record,
    )
    return np.clip(result.x, 0.0, upper)


def _row_objective(target: Vector, basis: DenseMatrix) -> Callable:
    # Candidates arrive as columns: (dim, S) -> S residual norms squared
    def objective(candidates: DenseMatrix) -> Vector:
        residual = target[:, np.newaxis] - basis.T @ candidates
        return (residual ** 2).sum(axis=0)
    return objective


def init_pba(x: DenseMatrix, r: int, cfg: Optional[DeConfig] = None, seed: int = 0,
             minimizer: Minimizer = de_minimize) -> FactorPair:
    """
    Fit W rows, then H columns, by population-based search.

    H0 is uniform on (0, 1]. Row i of W minimizes ||x_i - w_i H0||; column j
    of H then minimizes ||x_j - W h_j||. Every subproblem gets its own seed
    derived from (seed, row or column index), so the result does not depend
    on evaluation order.

    Args:
        x: Data matrix (m x n)
        r: Rank
        cfg: DE settings; upper defaults to max(X)
        seed: Master seed
        minimizer: Box-constrained minimizer

    Returns:
        FactorPair: Fitted non-negative factors

    Raises:
        BadRank: If r is out of range
    """
    m, n = x.shape
    check_rank(r, m, n)
    cfg = cfg or DeConfig()
    if cfg.upper is None:
        cfg = cfg.model_copy(update={"upper": max(float(x.max()), 1e-12)})

    h0 = uniform_factor(np.random.default_rng([seed, 2]), (r, n))
    w = np.vstack([
        minimizer(_row_objective(x[i], h0), r, cfg, [seed, 0, i], vectorized=True)
        for i in range(m)
    ])
    logger.debug("PBA fitted %d rows of W", m)
    h = np.column_stack([
        minimizer(_row_objective(x[:, j], w.T), r, cfg, [seed, 1, j], vectorized=True)
        for j in range(n)
    ])
    return FactorPair(w, h, Origin("pba", seed))
