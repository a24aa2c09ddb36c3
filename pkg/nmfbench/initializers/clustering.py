"""
Clustering-based initializers.

K-means (Lloyd iterations over the columns of X), fuzzy C-means, and
hierarchical clustering of the rows of X by closeness to rank one (CRO).
The seeding functions turn their centroids, memberships or row blocks into
non-negative (W, H) pairs.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Tuple

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from nmfbench.errors import BadK, BadRank, DomainError, ZeroMatrix
from nmfbench.initializers.random_schemes import uniform_factor
from nmfbench.linalg import DenseMatrix, check_rank, frobenius_norm, truncated_svd
from nmfbench.solvers import FactorPair, Origin

logger = logging.getLogger(__name__)

KMeansVariant = Literal["A", "B", "C", "D"]
Seeding = Literal["forgy", "partition"]

# Ties in CRO closer than this are resolved by the lower cluster pair
CRO_TIE_TOLERANCE = 1e-12


@dataclass
class Clustering:
    """
    Result of clustering the columns of X.

    Attributes:
        centroids: m x k matrix, column j is the centre c_j
        assignment: Cluster index of every data column
        objective: Final objective value (K-means M or the fuzzy objective)
        history: Objective after every iteration
    """
    centroids: DenseMatrix
    assignment: npt.NDArray[np.int_]
    objective: float
    history: List[float] = field(default_factory=list)


@dataclass
class FuzzyMembership:
    """
    Fuzzy membership degrees.

    Attributes:
        u: k x n matrix, column q holds the degrees of data point q (sums to 1)
        fuzzifier: Exponent m > 1
    """
    u: DenseMatrix
    fuzzifier: float = 2.0


@dataclass
class CroDendrogram:
    """
    Merge history of CRO hierarchical clustering over the rows of X.

    Clusters are identified by their smallest row index; a merge of a < b
    keeps the identifier a.

    Attributes:
        merges: (cluster a, cluster b, CRO of the merged block) in merge order
        clusters: Row indices of every final cluster, ordered by identifier
    """
    merges: List[Tuple[int, int, float]]
    clusters: List[List[int]]

    @property
    def labels(self) -> npt.NDArray[np.int_]:
        """Final cluster position of every row."""
        rows = sum(len(c) for c in self.clusters)
        labels = np.empty(rows, dtype=int)
        for position, members in enumerate(self.clusters):
            labels[members] = position
        return labels


def _require_non_negative(x: DenseMatrix) -> None:
    if np.any(x < 0):
        raise DomainError("clustering initializers require X >= 0")


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise BadK(f"k = {k} must satisfy 1 <= k <= n = {n}")


def _check_max_iter(max_iter: int) -> None:
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

# ===== K-MEANS =====

def _reseed_empty(points: DenseMatrix, labels: npt.NDArray[np.int_],
                  distances: DenseMatrix, k: int) -> npt.NDArray[np.int_]:
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        own = distances[np.arange(len(points)), labels]
        # Only points whose cluster would stay non-empty may move
        own[counts[labels] <= 1] = -np.inf
        farthest = int(np.argmax(own))
        logger.warning("empty cluster %d re-seeded from column %d", j, farthest)
        counts[labels[farthest]] -= 1
        labels[farthest] = j
        counts[j] = 1
    return labels


def _centroids(points: DenseMatrix, labels: npt.NDArray[np.int_], k: int) -> DenseMatrix:
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k)
    return sums / counts[:, np.newaxis]


def _within_cluster_sum(points: DenseMatrix, labels: npt.NDArray[np.int_],
                        centers: DenseMatrix) -> float:
    return float(((points - centers[labels]) ** 2).sum())


def kmeans(x: DenseMatrix, k: int, seed: int, max_iter: int = 100,
           seeding: Seeding = "forgy") -> Clustering:
    """
    Cluster the columns of X with Lloyd iterations.

    Forgy seeding takes k distinct random data columns as initial centres;
    partition seeding assigns every column to a random cluster first. Empty
    clusters are re-seeded from the point farthest from its own centre. The
    objective M is non-increasing from one iteration to the next.

    Args:
        x: Data matrix; its n columns are the points
        k: Number of clusters, 1 <= k <= n
        seed: Generator seed
        max_iter: Iteration cap
        seeding: 'forgy' or 'partition'

    Returns:
        Clustering: Centroids (m x k), assignment and objective history

    Raises:
        BadK: If k is out of range
        ValueError: If max_iter < 1
    """
    points = x.T
    n = points.shape[0]
    _check_k(k, n)
    _check_max_iter(max_iter)
    rng = np.random.default_rng(seed)

    if seeding == "partition":
        labels = rng.integers(k, size=n)
        spread = cdist(points, points.mean(axis=0, keepdims=True), "sqeuclidean")
        labels = _reseed_empty(points, labels, np.broadcast_to(spread, (n, k)), k)
        centers = _centroids(points, labels, k)
    else:
        centers = points[rng.choice(n, size=k, replace=False)]
        labels = np.full(n, -1)

    history: List[float] = []
    for iteration in range(max_iter):
        distances = cdist(points, centers, "sqeuclidean")
        new_labels = _reseed_empty(points, np.argmin(distances, axis=1), distances, k)
        centers = _centroids(points, new_labels, k)
        history.append(_within_cluster_sum(points, new_labels, centers))
        if np.array_equal(new_labels, labels):
            logger.debug("k-means converged after %d iterations", iteration + 1)
            break
        labels = new_labels

    return Clustering(centroids=centers.T.copy(), assignment=new_labels,
                      objective=history[-1], history=history)

# ===== FUZZY C-MEANS =====

def fuzzy_memberships(distances: DenseMatrix, fuzzifier: float) -> DenseMatrix:
    """
    Membership degrees h_kq = 1 / sum_k' (d_kq / d_k'q)^(2 / (m - 1)).

    A point that coincides with a centre gets membership 1 there and 0
    elsewhere (shared equally if several centres coincide).

    Args:
        distances: k x n Euclidean distances between centres and points
        fuzzifier: m > 1

    Returns:
        DenseMatrix: k x n memberships, columns sum to 1
    """
    coincident = distances <= 0.0
    nearest = distances.min(axis=0)
    safe = np.where(nearest > 0, nearest, 1.0)
    # Ratios to the nearest centre keep the powers in (0, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        inverse = (distances / safe) ** (-2.0 / (fuzzifier - 1.0))
        u = inverse / inverse.sum(axis=0)

    singular = coincident.any(axis=0)
    if singular.any():
        hits = coincident[:, singular].astype(float)
        u[:, singular] = hits / hits.sum(axis=0)
    return u


def _fuzzy_objective(u: DenseMatrix, distances: DenseMatrix, fuzzifier: float) -> float:
    return float(((u ** fuzzifier) * distances ** 2).sum())


def fcm(x: DenseMatrix, k: int, fuzzifier: float = 2.0, seed: int = 0,
        max_iter: int = 300, tol: float = 1e-6) -> Tuple[Clustering, FuzzyMembership]:
    """
    Fuzzy C-means over the columns of X.

    Alternates the weighted centroid update and the membership update
    until the largest membership change drops below tol.

    Args:
        x: Data matrix; its n columns are the points
        k: Number of clusters
        fuzzifier: m > 1
        seed: Generator seed for the initial memberships
        max_iter: Iteration cap
        tol: Convergence threshold on membership change

    Returns:
        tuple: (Clustering with hard argmax assignment, FuzzyMembership)

    Raises:
        BadK: If k is out of range
        ValueError: If fuzzifier <= 1 or max_iter < 1
    """
    points = x.T
    n = points.shape[0]
    _check_k(k, n)
    _check_max_iter(max_iter)
    if fuzzifier <= 1:
        raise ValueError(f"fuzzifier must be > 1, got {fuzzifier}")

    rng = np.random.default_rng(seed)
    u = rng.random((k, n))
    u /= u.sum(axis=0)

    history: List[float] = []
    for iteration in range(max_iter):
        weights = u ** fuzzifier
        centers = (weights @ points) / weights.sum(axis=1, keepdims=True)
        distances = cdist(centers, points)
        updated = fuzzy_memberships(distances, fuzzifier)
        history.append(_fuzzy_objective(updated, distances, fuzzifier))
        change = np.abs(updated - u).max()
        u = updated
        if change < tol:
            logger.debug("FCM converged after %d iterations", iteration + 1)
            break

    clustering = Clustering(centroids=centers.T.copy(), assignment=np.argmax(u, axis=0),
                            objective=history[-1], history=history)
    return clustering, FuzzyMembership(u=u, fuzzifier=fuzzifier)

# ===== CRO =====

def cro_measure(subrows: DenseMatrix) -> float:
    """
    Closeness to rank one, sigma_1^2 / ||A||_F^2.

    Args:
        subrows: Non-empty block of rows

    Returns:
        float: A value in (0, 1]; 1 for a rank-one block

    Raises:
        ZeroMatrix: If the block is identically zero
    """
    total = frobenius_norm(subrows) ** 2
    if total == 0.0:
        raise ZeroMatrix("CRO is undefined for a zero block")
    leading = truncated_svd(subrows, 1).sigma[0]
    return min(leading ** 2 / total, 1.0)


def _block_cro(x: DenseMatrix, rows: List[int]) -> float:
    try:
        return cro_measure(x[rows])
    except ZeroMatrix:
        # An all-zero block is trivially rank one
        return 1.0


def cro_cluster(x: DenseMatrix, r: int) -> CroDendrogram:
    """
    Agglomerate the rows of X by largest CRO until r clusters remain.

    Every row starts as its own cluster. Each step merges the pair whose
    union has the largest CRO; ties go to the lowest (a, b) pair.

    Args:
        x: Data matrix (m x n)
        r: Number of final clusters, 1 <= r <= m

    Returns:
        CroDendrogram: Merge sequence and final clusters

    Raises:
        BadRank: If r is out of range
    """
    m, n = x.shape
    # Rows are clustered, so only the row count bounds r
    if not 1 <= r <= m:
        raise BadRank(r, m, what="m")
    clusters: Dict[int, List[int]] = {i: [i] for i in range(m)}
    scores: Dict[Tuple[int, int], float] = {}
    merges: List[Tuple[int, int, float]] = []

    while len(clusters) > r:
        ids = sorted(clusters)
        best, best_pair = -1.0, None
        for pos, a in enumerate(ids):
            for b in ids[pos + 1:]:
                if (a, b) not in scores:
                    scores[(a, b)] = _block_cro(x, clusters[a] + clusters[b])
                if scores[(a, b)] > best + CRO_TIE_TOLERANCE:
                    best, best_pair = scores[(a, b)], (a, b)

        a, b = best_pair
        clusters[a] = sorted(clusters[a] + clusters.pop(b))
        scores = {pair: value for pair, value in scores.items()
                  if a not in pair and b not in pair}
        merges.append((a, b, best))
        logger.debug("CRO merge %d + %d (%.6f)", a, b, best)

    return CroDendrogram(merges=merges, clusters=[clusters[i] for i in sorted(clusters)])

# ===== SEEDING =====

def init_kmeans(x: DenseMatrix, r: int, variant: KMeansVariant, seed: int,
                fuzzifier: float = 2.0, seeding: Seeding = "forgy") -> FactorPair:
    """
    K-means seeding: W holds the centroids of the columns of X.

    Variants choose H:
        A: uniform random
        B: |W^T X|
        C: max(W^T X, 0)
        D: fuzzy membership degrees of every column to the centroids

    Args:
        x: Non-negative data matrix (m x n)
        r: Rank, number of clusters
        variant: 'A', 'B', 'C' or 'D'
        seed: Generator seed
        fuzzifier: Exponent for variant D
        seeding: K-means seeding scheme

    Returns:
        FactorPair: Centroid basis with the variant's coefficients

    Raises:
        BadRank: If r is out of range
        DomainError: If X has negative entries
    """
    m, n = x.shape
    check_rank(r, m, n)
    _require_non_negative(x)
    variant = variant.upper()
    if variant not in ("A", "B", "C", "D"):
        raise ValueError(f"unknown K-means variant {variant!r}")

    w = kmeans(x, r, seed, seeding=seeding).centroids
    if variant == "A":
        h = uniform_factor(np.random.default_rng([seed, 1]), (r, n))
    elif variant == "B":
        h = np.abs(w.T @ x)
    elif variant == "C":
        h = np.maximum(w.T @ x, 0.0)
    else:
        h = fuzzy_memberships(cdist(w.T, x.T), fuzzifier)
    return FactorPair(w, h, Origin(f"kmeans-{variant.lower()}", seed))


def init_fcm(x: DenseMatrix, r: int, seed: int, fuzzifier: float = 2.0) -> FactorPair:
    """FCM seeding: W = FCM centroids, H = membership matrix."""
    m, n = x.shape
    check_rank(r, m, n)
    _require_non_negative(x)
    clustering, membership = fcm(x, r, fuzzifier=fuzzifier, seed=seed)
    return FactorPair(clustering.centroids, membership.u, Origin("fcm", seed))


def init_cro(x: DenseMatrix, r: int) -> FactorPair:
    """
    CRO seeding from the rank-one structure of every row cluster.

    For each of the r row clusters, the leading singular pair of its block
    gives W entries |u| on the cluster's rows (zero elsewhere) and the H row
    sigma_1 |v|^T. Blocks of duplicated rows are reconstructed exactly.

    Args:
        x: Non-negative data matrix (m x n)
        r: Rank, number of row clusters

    Returns:
        FactorPair: Block-structured W with disjoint row supports

    Raises:
        BadRank: If r is outside 1..m
    """
    m, n = x.shape
    _require_non_negative(x)
    dendrogram = cro_cluster(x, r)

    w = np.zeros((m, r))
    h = np.zeros((r, n))
    for c, rows in enumerate(dendrogram.clusters):
        block = x[rows]
        if frobenius_norm(block) == 0.0:
            continue
        leading = truncated_svd(block, 1)
        w[rows, c] = np.abs(leading.u[:, 0])
        h[c] = leading.sigma[0] * np.abs(leading.v[:, 0])
    return FactorPair(w, h, Origin("cro"))
