"""
Dense linear-algebra primitives for nmfbench.

Every other module consumes matrices through this module: norms, the
relative reconstruction error used as the benchmark metric, column
statistics and a deterministic truncated SVD. Matrices are plain float64
numpy arrays; `dense_matrix` is the validating constructor.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg

from nmfbench.errors import (
    BadRank,
    ConvergenceFailure,
    EmptySelection,
    NonFiniteEntry,
    ZeroMatrix,
)

logger = logging.getLogger(__name__)

DenseMatrix = npt.NDArray[np.float64]

# Matrices with min(m, n) above this size use randomized subspace iteration
EXACT_SVD_LIMIT = 64
POWER_PASSES = 2
OVERSAMPLING = 8


def dense_matrix(values) -> DenseMatrix:
    """
    Build a validated 2-D float64 matrix.

    Args:
        values: Anything numpy can turn into a 2-D array

    Returns:
        DenseMatrix: A float64 copy of the values

    Raises:
        NonFiniteEntry: If any value is NaN or infinite
        ValueError: If the values are not two-dimensional
    """
    a = np.array(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {a.ndim} dimensions")
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry("matrix contains NaN or infinite values")
    return a


def check_rank(r: int, m: int, n: int) -> int:
    """Validate 1 <= r <= min(m, n) and return r."""
    bound = min(m, n)
    if not 1 <= r <= bound:
        raise BadRank(r, bound)
    return r


def frobenius_norm(a: DenseMatrix) -> float:
    """Return sqrt(sum of squared entries)."""
    return float(np.linalg.norm(a, "fro"))


def relative_error(x: DenseMatrix, w: DenseMatrix, h: DenseMatrix) -> float:
    """
    Relative reconstruction error ||X - WH||_F / ||X||_F.

    Args:
        x: Data matrix (m x n)
        w: Basis matrix (m x r)
        h: Coefficient matrix (r x n)

    Returns:
        float: The relative error, >= 0

    Raises:
        ZeroMatrix: If ||X||_F = 0
    """
    denominator = frobenius_norm(x)
    if denominator == 0.0:
        raise ZeroMatrix("relative error is undefined for a zero data matrix")
    return frobenius_norm(x - w @ h) / denominator


@dataclass(frozen=True)
class TruncatedSvd:
    """
    Leading singular triplets of a matrix.

    Attributes:
        u: m x p matrix with orthonormal columns
        sigma: p non-increasing, non-negative singular values
        v: n x p matrix with orthonormal columns
    """
    u: DenseMatrix
    sigma: npt.NDArray[np.float64]
    v: DenseMatrix

    @property
    def rank(self) -> int:
        return int(self.sigma.shape[0])

    def reconstruct(self) -> DenseMatrix:
        """Return u diag(sigma) v^T."""
        return (self.u * self.sigma) @ self.v.T


def _fix_signs(u: DenseMatrix, v: DenseMatrix) -> None:
    # Largest-magnitude entry of every u column is made positive
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[pivots, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u *= signs
    v *= signs


def _randomized_svd(a: DenseMatrix, p: int, rng: np.random.Generator):
    m, n = a.shape
    width = min(p + OVERSAMPLING, min(m, n))
    omega = rng.standard_normal((n, width))
    q, _ = np.linalg.qr(a @ omega)
    for _ in range(POWER_PASSES):
        z, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ z)
    u_small, sigma, vt = linalg.svd(q.T @ a, full_matrices=False)
    return q @ u_small, sigma, vt


def truncated_svd(a: DenseMatrix, p: int,
                  rng: Optional[np.random.Generator] = None) -> TruncatedSvd:
    """
    Compute the rank-p truncated SVD of a dense matrix.

    Small matrices (min(m, n) <= 64) go through LAPACK's full thin SVD, which
    is exact to working precision. Larger ones use randomized subspace
    iteration with two power passes and an oversampling of 8 columns. Signs
    are fixed so that the largest-magnitude entry of each u column is
    positive, which makes the result deterministic for a fixed input.

    Args:
        a: Matrix to decompose (m x n)
        p: Number of singular triplets, 1 <= p <= min(m, n)
        rng: Generator for the randomized path; a fixed seed is used if None

    Returns:
        TruncatedSvd: The leading p triplets

    Raises:
        BadRank: If p is out of range
        ConvergenceFailure: If the underlying LAPACK iteration fails
    """
    m, n = a.shape
    check_rank(p, m, n)

    try:
        if min(m, n) <= EXACT_SVD_LIMIT:
            u, sigma, vt = linalg.svd(a, full_matrices=False)
        else:
            logger.debug("randomized SVD of %dx%d matrix, p=%d", m, n, p)
            u, sigma, vt = _randomized_svd(a, p, rng or np.random.default_rng(0))
    except (np.linalg.LinAlgError, linalg.LinAlgError) as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc

    u = np.ascontiguousarray(u[:, :p])
    v = np.ascontiguousarray(vt[:p, :].T)
    sigma = np.maximum(sigma[:p], 0.0)
    _fix_signs(u, v)
    return TruncatedSvd(u=u, sigma=sigma, v=v)


def column_2norms(a: DenseMatrix) -> npt.NDArray[np.float64]:
    """Return the Euclidean norm of every column."""
    return np.linalg.norm(a, axis=0)


def mean_of_columns(a: DenseMatrix, idx: Sequence[int]) -> npt.NDArray[np.float64]:
    """
    Average a selection of columns.

    Args:
        a: Source matrix
        idx: Non-empty list of valid column indices (repeats allowed)

    Returns:
        ndarray: The elementwise mean column (length m)

    Raises:
        EmptySelection: If idx is empty or holds an invalid index
    """
    idx = np.asarray(idx, dtype=int)
    if idx.size == 0:
        raise EmptySelection("cannot average an empty column selection")
    if np.any(idx < 0) or np.any(idx >= a.shape[1]):
        raise EmptySelection(f"column index out of range 0..{a.shape[1] - 1}")
    return a[:, idx].mean(axis=1)
