"""
Low-rank initializers.

SVD-based seeding (absolute singular factors, NNDSVD and NNSVD-LRC), the
90% spectrum rule for choosing a rank, and the component-analysis schemes
NPCA and NICA, which project PCA / ICA factors onto the non-negative
orthant.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Tuple, Union

import numpy as np
import numpy.typing as npt
from sklearn.decomposition import FastICA

from nmfbench.errors import BadRank, DegenerateData, ZeroSpectrum
from nmfbench.initializers.random_schemes import uniform_factor
from nmfbench.linalg import DenseMatrix, check_rank, frobenius_norm, truncated_svd
from nmfbench.solvers import FactorPair, Origin

logger = logging.getLogger(__name__)

RANK_SELECTION_THRESHOLD = 0.90
NPCA_ALPHA = 0.9
LRC_REFINE_STEPS = 20
LRC_EPSILON = 1e-12
# Registered NPCA cells are deterministic, so their zero-column fallback uses this seed
NPCA_FALLBACK_SEED = 0

Projection = Literal["clip", "abs"]


def lrc_rank(r: int) -> int:
    """Rank of the truncated SVD used by NNSVD-LRC, floor(r / 2 + 1)."""
    return r // 2 + 1


@dataclass(frozen=True)
class PcaModel:
    """
    Principal components of the columns of X.

    Attributes:
        mean: Average column psi (length m)
        components: m x r orthonormal principal directions
        eigenvalues: r non-increasing eigenvalues of the centered scatter
    """
    mean: npt.NDArray[np.float64]
    components: DenseMatrix
    eigenvalues: npt.NDArray[np.float64]

    @property
    def rank(self) -> int:
        return int(self.components.shape[1])

    def center(self, x: DenseMatrix) -> DenseMatrix:
        return x - self.mean[:, np.newaxis]


@dataclass(frozen=True)
class LrcFactors:
    """Rank-p split of the truncated SVD: y = U S^1/2 (m x p), z = S^1/2 V^T (p x n)."""
    y: DenseMatrix
    z: DenseMatrix

# ===== SVD FAMILY =====

def init_svd_abs(x: DenseMatrix, r: int) -> FactorPair:
    """
    SVD seeding: W = |U_r|, H = |S_r V_r^T|.

    Args:
        x: Data matrix (m x n)
        r: Rank

    Returns:
        FactorPair: Absolute values of the rank-r singular factors

    Raises:
        BadRank: If r is out of range
    """
    svd = truncated_svd(x, r)
    w = np.abs(svd.u)
    h = np.abs(svd.sigma[:, np.newaxis] * svd.v.T)
    return FactorPair(w, h, Origin("svd-abs"))


def select_rank_90(sigma, threshold: float = RANK_SELECTION_THRESHOLD,
                   squared: bool = False) -> int:
    """
    Smallest i whose leading singular values hold `threshold` of the total.

    Args:
        sigma: Non-increasing, non-negative singular values
        threshold: Required cumulative fraction (0.90)
        squared: Use sums of squared values instead of plain sums

    Returns:
        int: The selected rank

    Raises:
        ZeroSpectrum: If the spectrum sums to zero or is empty
    """
    values = np.asarray(sigma, dtype=np.float64)
    if squared:
        values = values ** 2
    total = values.sum()
    if values.size == 0 or total <= 0:
        raise ZeroSpectrum("cannot select a rank from an empty or zero spectrum")
    fractions = np.cumsum(values) / total
    return int(np.argmax(fractions >= threshold - 1e-12)) + 1


def _positive(a: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return np.maximum(a, 0.0)


def init_nndsvd(x: DenseMatrix, r: int) -> FactorPair:
    """
    NNDSVD: deterministic seeding from positive sections of singular pairs.

    The leading pair gives W(:,1) = sqrt(s1)|u1|, H(1,:) = sqrt(s1)|v1|^T.
    Every further pair (u_j, v_j) is split into positive and negative parts;
    the sign pair with the larger product of part norms is kept, normalized
    and rescaled by sqrt(s_j * norm product). Pairs with no positive mass in
    either sign stay zero.

    Args:
        x: Non-negative data matrix (m x n)
        r: Rank

    Returns:
        FactorPair: NNDSVD factors

    Raises:
        BadRank: If r is out of range
    """
    svd = truncated_svd(x, r)
    m, n = x.shape
    w = np.zeros((m, r))
    h = np.zeros((r, n))

    w[:, 0] = np.sqrt(svd.sigma[0]) * np.abs(svd.u[:, 0])
    h[0, :] = np.sqrt(svd.sigma[0]) * np.abs(svd.v[:, 0])

    for j in range(1, r):
        u, v = svd.u[:, j], svd.v[:, j]
        sections = []
        for su, sv in ((_positive(u), _positive(v)), (_positive(-u), _positive(-v))):
            nu, nv = np.linalg.norm(su), np.linalg.norm(sv)
            sections.append((nu * nv, su, sv, nu, nv))
        # Positive sections win ties
        mass, su, sv, nu, nv = max(sections, key=lambda s: s[0])
        if mass == 0.0:
            continue
        scale = np.sqrt(svd.sigma[j] * mass)
        w[:, j] = scale * su / nu
        h[j, :] = scale * sv / nv

    return FactorPair(w, h, Origin("nndsvd"))


def lrc_factors(x: DenseMatrix, r: int) -> LrcFactors:
    """Split the rank-floor(r/2+1) truncated SVD of X into Y_p, Z_p."""
    svd = truncated_svd(x, lrc_rank(r))
    root = np.sqrt(svd.sigma)
    return LrcFactors(y=svd.u * root, z=root[:, np.newaxis] * svd.v.T)


def nnsvd_lrc_unrefined(x: DenseMatrix, r: int) -> Tuple[DenseMatrix, DenseMatrix, LrcFactors]:
    """
    Fill W and H from the positive and negative parts of Y_p and Z_p.

    Column 1 takes |Y_p(:,1)| and |Z_p(1,:)|. The remaining columns come in
    pairs sharing one Y_p column j (and Z_p row j): the first of the pair
    takes max(Y_p(:,j), 0), the second max(-Y_p(:,j), 0), with H rows
    filled the same way from Z_p. Columns of a pair have disjoint supports.

    Args:
        x: Non-negative data matrix (m x n)
        r: Rank, 2 <= r <= min(m, n)

    Returns:
        tuple: (W, H, LrcFactors) before low-rank correction

    Raises:
        BadRank: If r is out of range
    """
    m, n = x.shape
    if r < 2:
        raise BadRank(r, min(m, n), lower=2)
    check_rank(r, m, n)
    factors = lrc_factors(x, r)
    y, z = factors.y, factors.z

    w = np.zeros((m, r))
    h = np.zeros((r, n))
    w[:, 0] = np.abs(y[:, 0])
    h[0, :] = np.abs(z[0, :])
    for i in range(1, r):
        j = (i + 1) // 2
        sign = 1.0 if i % 2 == 1 else -1.0
        w[:, i] = _positive(sign * y[:, j])
        h[i, :] = _positive(sign * z[j, :])
    return w, h, factors


def init_nnsvd_lrc(x: DenseMatrix, r: int, refine_steps: int = LRC_REFINE_STEPS) -> FactorPair:
    """
    NNSVD-LRC: positive-part filling followed by low-rank corrected updates.

    After filling, `refine_steps` multiplicative updates for the squared
    Euclidean objective are applied in which every product with X goes
    through the rank-p form Y_p Z_p. Their numerators are clipped at zero,
    since Y_p Z_p may hold negative entries.

    Args:
        x: Non-negative data matrix (m x n)
        r: Rank, 2 <= r <= min(m, n)
        refine_steps: Number of low-rank corrected updates (20)

    Returns:
        FactorPair: Refined non-negative factors

    Raises:
        BadRank: If r is out of range
    """
    w, h, factors = nnsvd_lrc_unrefined(x, r)
    y, z = factors.y, factors.z
    for _ in range(refine_steps):
        w = w * _positive(y @ (z @ h.T)) / (w @ (h @ h.T) + LRC_EPSILON)
        h = h * _positive((w.T @ y) @ z) / ((w.T @ w) @ h + LRC_EPSILON)
    return FactorPair(w, h, Origin("nnsvd-lrc"))

# ===== COMPONENT ANALYSIS =====

def fit_pca(x: DenseMatrix, r_or_alpha: Union[int, float] = NPCA_ALPHA) -> PcaModel:
    """
    Principal components of the columns of X.

    The centered matrix X - psi 1^T is decomposed by SVD; eigenvalues are
    the squared singular values (scatter without 1/(n-1) scaling). An int
    argument fixes r; a float alpha selects the smallest r whose leading
    eigenvalues hold a fraction alpha of the total.

    Args:
        x: Data matrix (m x n), n >= 2
        r_or_alpha: Component count, or explained fraction in (0, 1]

    Returns:
        PcaModel: Mean, components and eigenvalues

    Raises:
        DegenerateData: If n < 2 or the centered data is zero
        BadRank: If an explicit r is out of range
    """
    m, n = x.shape
    if n < 2:
        raise DegenerateData(f"PCA needs at least 2 columns, got {n}")
    mean = x.mean(axis=1)
    centered = x - mean[:, np.newaxis]
    if frobenius_norm(centered) <= 1e-12 * max(frobenius_norm(x), 1.0):
        raise DegenerateData("centered data is zero: all columns are identical")

    if isinstance(r_or_alpha, float):
        if not 0 < r_or_alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {r_or_alpha}")
        spectrum = truncated_svd(centered, min(m, n)).sigma ** 2
        r = select_rank_90(spectrum, threshold=r_or_alpha)
    else:
        r = check_rank(int(r_or_alpha), m, n)

    svd = truncated_svd(centered, r)
    return PcaModel(mean=mean, components=svd.u, eigenvalues=svd.sigma ** 2)


def _project(a: DenseMatrix, projection: Projection) -> DenseMatrix:
    return np.abs(a) if projection == "abs" else _positive(a)


def init_npca(x: DenseMatrix, r: int, seed: int = 0,
              projection: Projection = "clip") -> FactorPair:
    """
    NPCA: principal components and their scores projected onto W, H >= 0.

    'clip' sets negative entries to zero; 'abs' takes absolute values. Any
    W column annihilated by the projection is replaced by uniform random
    positive entries drawn from the seed.

    Args:
        x: Data matrix (m x n)
        r: Rank
        seed: Generator seed for the zero-column fallback
        projection: 'clip' or 'abs'

    Returns:
        FactorPair: Projected PCA factors

    Raises:
        DegenerateData: If the centered data is zero
        BadRank: If r is out of range
    """
    model = fit_pca(x, r)
    w = _project(model.components, projection)
    h = _project(model.components.T @ model.center(x), projection)

    empty = np.flatnonzero(~w.any(axis=0))
    if empty.size:
        logger.warning("NPCA projection emptied %d W column(s); filling at random", empty.size)
        w[:, empty] = uniform_factor(np.random.default_rng(seed), (w.shape[0], empty.size))

    name = "npca" if projection == "clip" else "npca-abs"
    return FactorPair(w, h, Origin(name))


def whiten(x: DenseMatrix, r: int) -> Tuple[DenseMatrix, PcaModel]:
    """
    Center X and whiten it to r dimensions.

    Returns Z (r x n) with (1/n) Z Z^T = I, and the PCA model used.

    Raises:
        DegenerateData: If fewer than r directions carry variance
    """
    model = fit_pca(x, r)
    sigma = np.sqrt(model.eigenvalues)
    if sigma[-1] <= 1e-10 * sigma[0]:
        raise DegenerateData(f"centered data has fewer than {r} non-trivial directions")
    n = x.shape[1]
    z = np.sqrt(n) * (model.components.T @ model.center(x)) / sigma[:, np.newaxis]
    return z, model


def fast_ica(z: DenseMatrix, seed: int, max_iter: int = 200, tol: float = 1e-6) -> DenseMatrix:
    """
    Unmixing matrix for whitened data by the fixed-point log-cosh contrast.

    Components are extracted one at a time; each is kept orthogonal to the
    ones before it (deflation), so the result is an orthonormal rotation.

    Args:
        z: Whitened data (r x n)
        seed: Seed for the starting vectors, any non-negative int
        max_iter: Iteration cap per component
        tol: Threshold on 1 - |<w_new, w_old>|

    Returns:
        DenseMatrix: Orthonormal r x r unmixing matrix, one component per row
    """
    # MT19937 takes 64-bit cell seeds, RandomState(int) does not
    state = np.random.RandomState(np.random.MT19937(seed))
    ica = FastICA(whiten=False, algorithm="deflation", fun="logcosh",
                  max_iter=max_iter, tol=tol, random_state=state)
    ica.fit(z.T)
    if ica.n_iter_ >= max_iter:
        logger.warning("ICA did not converge in %d iterations", max_iter)
    else:
        logger.debug("ICA converged after %d iterations", ica.n_iter_)
    return ica.components_


def init_nica(x: DenseMatrix, r: int, seed: int = 0) -> FactorPair:
    """
    NICA: independent components as basis, estimated sources as weights.

    X is centered and whitened to r dimensions, an unmixing rotation is
    estimated, and the mixing matrix A and sources S are expressed in the
    original coordinates. The mean column is folded into the sources
    (S + A^+ psi) so that A S reconstructs X rather than its centered form;
    every component is sign-flipped to carry positive source mass before
    the magnitudes |A|, |S| are taken.

    Args:
        x: Data matrix (m x n)
        r: Rank
        seed: Generator seed for the ICA starting point

    Returns:
        FactorPair: W = |A|, H = |S|

    Raises:
        DegenerateData: If the centered data spans fewer than r directions
        BadRank: If r is out of range
    """
    z, model = whiten(x, r)
    unmixing = fast_ica(z, seed)
    sources = unmixing @ z

    n = x.shape[1]
    scale = np.sqrt(model.eigenvalues / n)
    mixing = (model.components * scale) @ unmixing.T
    offset, *_ = np.linalg.lstsq(mixing, model.mean, rcond=None)
    sources = sources + offset[:, np.newaxis]

    signs = np.where(sources.sum(axis=1) < 0, -1.0, 1.0)
    w = np.abs(mixing * signs)
    h = np.abs(sources * signs[:, np.newaxis])
    return FactorPair(w, h, Origin("nica", seed))
