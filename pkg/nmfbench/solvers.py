"""
NMF objectives, update engines and the generic iteration driver.

Three engines are provided: multiplicative updates for the squared
Euclidean distance (SED-MU), multiplicative updates for the generalized
Kullback-Leibler divergence (KL-MU) and alternating non-negative least
squares (ANLS). `run_nmf` drives any of them from an initializer output
until successive products stop moving or the iteration cap is reached.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np
import numpy.typing as npt
from scipy import optimize

from nmfbench.errors import ConvergenceFailure, DomainError, NonFiniteEntry, ShapeMismatch
from nmfbench.linalg import DenseMatrix, frobenius_norm, relative_error
from nmfbench.schemas import DEFAULT_EPSILON_GUARD, SolverConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Origin:
    """Which initializer produced a factor pair, and with which seed."""
    name: str
    seed: Optional[int] = None


@dataclass(frozen=True)
class FactorPair:
    """
    A candidate factorization X ~ WH.

    Attributes:
        w: Basis matrix (m x r), entries >= 0
        h: Coefficient matrix (r x n), entries >= 0
        origin: Initializer name and seed

    Raises:
        NonFiniteEntry: If W or H holds NaN/Inf
        DomainError: If W or H holds a negative entry
        ShapeMismatch: If the inner dimensions differ
    """
    w: DenseMatrix
    h: DenseMatrix
    origin: Origin = field(default_factory=lambda: Origin("manual"))

    def __post_init__(self):
        if self.w.ndim != 2 or self.h.ndim != 2 or self.w.shape[1] != self.h.shape[0]:
            raise ShapeMismatch(f"W {self.w.shape} and H {self.h.shape} do not conform")
        for label, factor in (("W", self.w), ("H", self.h)):
            if not np.all(np.isfinite(factor)):
                raise NonFiniteEntry(f"{label} contains NaN or infinite values")
            if np.any(factor < 0):
                raise DomainError(f"{label} contains negative entries")

    @property
    def rank(self) -> int:
        return int(self.w.shape[1])

    def product(self) -> DenseMatrix:
        return self.w @ self.h

    def check_conforms(self, x: DenseMatrix) -> None:
        """Raise ShapeMismatch unless W is m x r and H is r x n for X."""
        m, n = x.shape
        if self.w.shape[0] != m or self.h.shape[1] != n:
            raise ShapeMismatch(
                f"factors {self.w.shape} x {self.h.shape} do not match X {x.shape}"
            )


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    objective: float
    rel_error: float
    elapsed_ms: float


@dataclass
class IterationTrace:
    """
    Per-iteration record of one solver run.

    Attributes:
        points: One entry per iteration, starting at 0 (the initial point)
        stop_reason: 'tol' or 'max_iter'
    """
    points: List[TracePoint] = field(default_factory=list)
    stop_reason: str = ""

    def rel_errors(self) -> npt.NDArray[np.float64]:
        return np.array([p.rel_error for p in self.points])

# ===== OBJECTIVES =====

def sed_objective(x: DenseMatrix, w: DenseMatrix, h: DenseMatrix) -> float:
    """Return the squared Euclidean objective 0.5 * ||X - WH||_F^2."""
    return 0.5 * frobenius_norm(x - w @ h) ** 2


def _check_kl_domain(x: DenseMatrix, wh: DenseMatrix) -> None:
    bad = (x > 0) & (wh <= 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DomainError(f"x[{i},{j}] > 0 but (WH)[{i},{j}] = 0")


def kl_divergence(x: DenseMatrix, w: DenseMatrix, h: DenseMatrix) -> float:
    """
    Generalized Kullback-Leibler divergence D(X || WH).

    Sum over i, j of x log(x / wh) - x + wh, with 0 log 0 = 0.

    Args:
        x: Data matrix
        w: Basis matrix
        h: Coefficient matrix

    Returns:
        float: The divergence, >= 0

    Raises:
        DomainError: If x_ij > 0 where (WH)_ij = 0
    """
    wh = w @ h
    _check_kl_domain(x, wh)
    positive = x > 0
    # Safe operands keep log() away from zeros outside the positive support
    safe_x = np.where(positive, x, 1.0)
    safe_wh = np.where(positive, wh, 1.0)
    terms = np.where(positive, x * np.log(safe_x / safe_wh) - x + wh, wh)
    return float(terms.sum())

# ===== UPDATE ENGINES =====

def mu_sed_step(x: DenseMatrix, pair: FactorPair,
                epsilon_guard: float = DEFAULT_EPSILON_GUARD) -> FactorPair:
    """
    One multiplicative update for the squared Euclidean objective.

    W is updated first; the H update then uses the new W.

    Args:
        x: Data matrix (m x n)
        pair: Current non-negative factors
        epsilon_guard: Constant added to the denominators

    Returns:
        FactorPair: Updated factors (same origin)
    """
    w, h = pair.w, pair.h
    w = w * (x @ h.T) / (w @ (h @ h.T) + epsilon_guard)
    h = h * (w.T @ x) / ((w.T @ w) @ h + epsilon_guard)
    return replace(pair, w=w, h=h)


def mu_kl_step(x: DenseMatrix, pair: FactorPair,
               epsilon_guard: float = DEFAULT_EPSILON_GUARD) -> FactorPair:
    """
    One multiplicative update for the generalized KL divergence.

    Order: update W, normalize the columns of W to sum to one, update H.
    The normalization scale is folded into the rows of H so WH is unchanged
    by it; only the two multiplicative updates move the product.

    Args:
        x: Data matrix (m x n)
        pair: Current non-negative factors
        epsilon_guard: Constant added to the denominators

    Returns:
        FactorPair: Updated factors; every non-zero W column sums to 1

    Raises:
        DomainError: If x_ij > 0 where (WH)_ij = 0
    """
    w, h = pair.w, pair.h
    wh = w @ h
    _check_kl_domain(x, wh)

    ratio = x / (wh + epsilon_guard)
    w = w * (ratio @ h.T) / (h.sum(axis=1) + epsilon_guard)

    # Column normalization; all-zero columns are left at zero
    scale = w.sum(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    w = w / scale
    h = h * scale[:, np.newaxis]

    ratio = x / (w @ h + epsilon_guard)
    h = h * (w.T @ ratio) / (w.sum(axis=0)[:, np.newaxis] + epsilon_guard)
    return replace(pair, w=w, h=h)


def nnls_solve(a: DenseMatrix, b: npt.NDArray[np.float64],
               max_iter: Optional[int] = None) -> npt.NDArray[np.float64]:
    """
    Solve argmin_{y >= 0} ||b - a y||_2 with the Lawson-Hanson active set.

    Args:
        a: System matrix (m x k)
        b: Right-hand side (length m)
        max_iter: Iteration cap, default 10 * k

    Returns:
        ndarray: The non-negative solution (length k)

    Raises:
        ConvergenceFailure: If the active-set loop exceeds its cap
    """
    cap = max_iter if max_iter is not None else 10 * a.shape[1]
    try:
        y, _ = optimize.nnls(a, b, maxiter=cap)
    except RuntimeError as exc:
        raise ConvergenceFailure(f"NNLS exceeded {cap} iterations") from exc
    return y


def anls_step(x: DenseMatrix, pair: FactorPair,
              epsilon_guard: float = DEFAULT_EPSILON_GUARD) -> FactorPair:
    """
    One alternating non-negative least squares sweep.

    Each row of W solves an NNLS problem against the current H, then each
    column of H solves an NNLS problem against the new W. Both subproblems
    are solved exactly, so the objective cannot increase.

    Args:
        x: Data matrix (m x n)
        pair: Current non-negative factors
        epsilon_guard: Unused; accepted so all engines share one signature

    Returns:
        FactorPair: Updated factors

    Raises:
        ConvergenceFailure: Propagated from nnls_solve
    """
    ht = pair.h.T
    w = np.vstack([nnls_solve(ht, row) for row in x])
    h = np.column_stack([nnls_solve(w, column) for column in x.T])
    return replace(pair, w=w, h=h)

# ===== DRIVER =====

STEPS: Dict[str, Callable[..., FactorPair]] = {
    "sed-mu": mu_sed_step,
    "kl-mu": mu_kl_step,
    "anls": anls_step,
}

OBJECTIVES: Dict[str, Callable[[DenseMatrix, DenseMatrix, DenseMatrix], float]] = {
    "sed-mu": sed_objective,
    "kl-mu": kl_divergence,
    "anls": sed_objective,
}


def run_nmf(x: DenseMatrix, init: FactorPair, cfg: SolverConfig,
            clock: Optional[Callable[[], float]] = None):
    """
    Iterate an update engine from an initial factor pair.

    Stops when ||W^k H^k - W^{k-1} H^{k-1}||_F <= cfg.tol or after
    cfg.max_iter iterations, whichever comes first. The difference is taken
    on the materialized m x n products, an O(mnr) cost per iteration.

    Args:
        x: Data matrix (m x n)
        init: Initial factors; iteration 0 of the trace measures them untouched
        cfg: Solver configuration
        clock: Returns seconds (e.g. time.perf_counter); None records 0 ms

    Returns:
        tuple: (final FactorPair, IterationTrace)

    Raises:
        ShapeMismatch: If init does not conform to X
        NmfError: Propagated from the update engine
    """
    init.check_conforms(x)
    step = STEPS[cfg.kind]
    objective = OBJECTIVES[cfg.kind]
    started = clock() if clock else 0.0

    def elapsed() -> float:
        return (clock() - started) * 1000.0 if clock else 0.0

    trace = IterationTrace()
    pair = init
    product = pair.product()
    trace.points.append(TracePoint(0, objective(x, pair.w, pair.h),
                                   relative_error(x, pair.w, pair.h), elapsed()))

    for k in range(1, cfg.max_iter + 1):
        pair = step(x, pair, epsilon_guard=cfg.epsilon_guard)
        next_product = pair.product()
        change = frobenius_norm(next_product - product)
        product = next_product
        trace.points.append(TracePoint(k, objective(x, pair.w, pair.h),
                                       relative_error(x, pair.w, pair.h), elapsed()))
        if k % 50 == 0:
            logger.debug("%s iteration %d: change %.3e", cfg.kind, k, change)
        if change <= cfg.tol:
            trace.stop_reason = "tol"
            break
    else:
        trace.stop_reason = "max_iter"

    return pair, trace
