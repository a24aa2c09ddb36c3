"""
Random-scheme initializers.

Random, Random Acol, Random C, co-occurrence and Gabor-based seeding. The
schemes other than plain Random only define W; their H is drawn uniformly
at random like the plain scheme. Every function is a pure function of its
inputs and the seed.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from nmfbench.errors import BadQ, NotAnImageDataset
from nmfbench.linalg import DenseMatrix, check_rank, column_2norms, mean_of_columns
from nmfbench.schemas import GaborBank
from nmfbench.solvers import FactorPair, Origin

logger = logging.getLogger(__name__)

# Entries of X X^T at or below this magnitude do not count towards density
DENSITY_THRESHOLD = 1e-12
# Gaussian envelope coverage of auto-sized Gabor windows, in standard deviations
GABOR_ENVELOPE_SPAN = 7.0


def uniform_factor(rng: np.random.Generator, shape: Tuple[int, int]) -> DenseMatrix:
    # Generator.random() draws from [0, 1); flip it onto (0, 1]
    return 1.0 - rng.random(shape)


def _candidate_pool(r: int, size: int, floor: int) -> int:
    return min(max(2 * r, math.ceil(size / 5), floor), size)


def init_random(m: int, n: int, r: int, seed: int) -> FactorPair:
    """
    Draw W (m x r) and H (r x n) i.i.d. uniform on (0, 1].

    Args:
        m: Rows of X
        n: Columns of X
        r: Rank, 1 <= r <= min(m, n)
        seed: Generator seed

    Returns:
        FactorPair: The random factors

    Raises:
        BadRank: If r is out of range
    """
    check_rank(r, m, n)
    rng = np.random.default_rng(seed)
    w = uniform_factor(rng, (m, r))
    h = uniform_factor(rng, (r, n))
    return FactorPair(w, h, Origin("random", seed))


def init_random_acol(x: DenseMatrix, r: int, q: int, seed: int) -> FactorPair:
    """
    Random Acol: every W column averages q random columns of X.

    Columns are sampled without replacement per W column; H is uniform.

    Args:
        x: Data matrix (m x n)
        r: Rank
        q: Columns averaged per basis vector, 1 <= q <= n
        seed: Generator seed

    Returns:
        FactorPair: W from column averages, random H

    Raises:
        BadRank: If r is out of range
        BadQ: If q is out of range
    """
    m, n = x.shape
    check_rank(r, m, n)
    if not 1 <= q <= n:
        raise BadQ(f"q = {q} must satisfy 1 <= q <= n = {n}")

    rng = np.random.default_rng(seed)
    w = np.column_stack([
        mean_of_columns(x, rng.choice(n, size=q, replace=False)) for _ in range(r)
    ])
    h = uniform_factor(rng, (r, n))
    return FactorPair(w, h, Origin("random-acol", seed))


def longest_columns(x: DenseMatrix, pool: int) -> npt.NDArray[np.int_]:
    """
    Indices of the `pool` columns with the largest 2-norm, ascending.

    Ties are broken in favour of the lower column index.
    """
    order = np.argsort(-column_2norms(x), kind="stable")
    return np.sort(order[:pool])


def init_random_c(x: DenseMatrix, r: int, q: int, pool: Optional[int],
                  seed: int) -> FactorPair:
    """
    Random C: like Random Acol, but sampling from the longest columns.

    The candidate pool holds the `pool` columns of largest 2-norm. With
    pool = n the sample path is identical to Random Acol for the same seed.

    Args:
        x: Data matrix (m x n)
        r: Rank
        q: Columns averaged per basis vector
        pool: Candidate count, q <= pool <= n; None means max(2r, ceil(n/5))
            clamped to [q, n]
        seed: Generator seed

    Returns:
        FactorPair: W from averages of long columns, random H

    Raises:
        BadRank: If r is out of range
        BadQ: If q or pool is out of range
    """
    m, n = x.shape
    check_rank(r, m, n)
    if not 1 <= q <= n:
        raise BadQ(f"q = {q} must satisfy 1 <= q <= n = {n}")
    if pool is None:
        pool = _candidate_pool(r, n, q)
    if not q <= pool <= n:
        raise BadQ(f"pool = {pool} must satisfy q = {q} <= pool <= n = {n}")

    candidates = longest_columns(x, pool)
    rng = np.random.default_rng(seed)
    w = np.column_stack([
        mean_of_columns(x, candidates[rng.choice(pool, size=q, replace=False)])
        for _ in range(r)
    ])
    h = uniform_factor(rng, (r, n))
    return FactorPair(w, h, Origin("random-c", seed))


def density_ranking(c: DenseMatrix) -> npt.NDArray[np.int_]:
    """
    Order the columns of c from densest to sparsest.

    Density is the count of entries above 1e-12 in magnitude; ties go to the
    larger 2-norm, then to the lower index.
    """
    density = np.count_nonzero(np.abs(c) > DENSITY_THRESHOLD, axis=0)
    norms = column_2norms(c)
    # lexsort sorts by the last key first
    return np.lexsort((np.arange(c.shape[1]), -norms, -density))


def init_cooccurrence(x: DenseMatrix, r: int, seed: int) -> FactorPair:
    """
    Co-occurrence: W columns drawn among the densest columns of X X^T.

    Args:
        x: Data matrix (m x n)
        r: Rank
        seed: Generator seed

    Returns:
        FactorPair: W from co-occurrence columns, random H

    Raises:
        BadRank: If r is out of range
    """
    m, n = x.shape
    check_rank(r, m, n)
    c = x @ x.T
    candidates = density_ranking(c)[:_candidate_pool(r, m, r)]

    rng = np.random.default_rng(seed)
    chosen = rng.choice(candidates, size=r, replace=False)
    w = c[:, chosen]
    h = uniform_factor(rng, (r, n))
    return FactorPair(w, h, Origin("cooc", seed))


def gabor_kernel(bank: GaborBank, mu: int, v: int) -> npt.NDArray[np.complex128]:
    """
    Evaluate the Gabor wavelet psi_{mu,v} on an integer window.

    psi(z) = (|k|^2 / s^2) exp(-|k|^2 |z|^2 / (2 s^2)) [exp(-i k.z) - exp(-s^2 / 2)]
    with k = k_v exp(-i phi_mu), k_v = k_max / f^v and phi_mu = pi mu / orientations.
    The window is indexed [row offset y, column offset x] with z = (x, y)
    at the centre.

    Args:
        bank: Kernel family parameters
        mu: Orientation index, < bank.orientations
        v: Scale index, < bank.scales

    Returns:
        ndarray: Complex window of odd size

    Raises:
        ValueError: If mu or v is out of range
    """
    if not (0 <= mu < bank.orientations and 0 <= v < bank.scales):
        raise ValueError(f"(mu, v) = ({mu}, {v}) outside the bank")

    k_v = bank.k_max / bank.spacing ** v
    phi = math.pi * mu / bank.orientations
    kx, ky = k_v * math.cos(phi), -k_v * math.sin(phi)

    if bank.window is None:
        half = math.ceil(GABOR_ENVELOPE_SPAN * bank.sigma / k_v)
    else:
        half = bank.window // 2
    ys, xs = np.mgrid[-half:half + 1, -half:half + 1]

    s2 = bank.sigma ** 2
    k2 = k_v ** 2
    envelope = (k2 / s2) * np.exp(-k2 * (xs ** 2 + ys ** 2) / (2 * s2))
    return envelope * (np.exp(-1j * (kx * xs + ky * ys)) - math.exp(-s2 / 2))


def gabor_response(image: DenseMatrix,
                   kernel: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    """
    Convolve an image with a centred kernel, with periodic boundaries.

    The kernel is wrapped onto the image grid so windows larger than the
    image are allowed; the product is taken in the Fourier domain.
    """
    half = kernel.shape[0] // 2
    ys, xs = np.mgrid[-half:half + 1, -half:half + 1]
    wrapped = np.zeros(image.shape, dtype=np.complex128)
    np.add.at(wrapped, (ys % image.shape[0], xs % image.shape[1]), kernel)
    return np.fft.ifft2(np.fft.fft2(image) * np.fft.fft2(wrapped))


def init_gabor(x: DenseMatrix, image_shape: Optional[Tuple[int, int]], r: int,
               bank: GaborBank, seed: int) -> FactorPair:
    """
    Gabor-based W: magnitudes of Gabor responses of r sampled images.

    Each sampled dataset column is reshaped to an image (column-major),
    convolved with a randomly chosen (mu, v) kernel, and |G| becomes the W
    column after max-normalization. When the response vanishes (e.g. a
    constant image against the zero-mean kernel) the raw image column is
    used instead. H is uniform.

    Args:
        x: Data matrix whose columns are vectorized images
        image_shape: (rows, cols) of every image
        r: Rank
        bank: Kernel family
        seed: Generator seed

    Returns:
        FactorPair: W from Gabor magnitudes, random H

    Raises:
        NotAnImageDataset: If image_shape is missing or rows * cols != m
        BadRank: If r is out of range
    """
    m, n = x.shape
    if image_shape is None or image_shape[0] * image_shape[1] != m:
        raise NotAnImageDataset(f"image shape {image_shape} does not match {m} rows")
    check_rank(r, m, n)

    rng = np.random.default_rng(seed)
    columns = []
    for j in rng.choice(n, size=r, replace=False):
        mu = int(rng.integers(bank.orientations))
        v = int(rng.integers(bank.scales))
        kernel = gabor_kernel(bank, mu, v)
        image = x[:, j].reshape(image_shape, order="F")
        magnitude = np.abs(gabor_response(image, kernel))

        scale = np.abs(image).max() * np.abs(kernel).sum()
        if magnitude.max() <= 1e-6 * scale:
            logger.warning("Gabor response of column %d vanished, using raw image", j)
            column = x[:, j].copy()
        else:
            column = magnitude.ravel(order="F")
        peak = column.max()
        columns.append(column / peak if peak > 0 else column)

    w = np.column_stack(columns)
    h = uniform_factor(rng, (r, n))
    return FactorPair(w, h, Origin("gabor", seed))
