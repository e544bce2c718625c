"""
Path clustering and random trimming.

Path similarity scores each feature of the forest: 1 when neither path
tests it, the overlap ratio of the two ranges when both do, 0 when only
one does. k-medoids (PAM) clusters the paths on 1 - similarity, and the
largest clusters are collected whole until the path floor is met.
random_trim draws the final subset of exactly the floor size.
"""

import math
from typing import Optional, Sequence

import numpy as np

from domain.errors import ReductionError
from domain.forest import FeatureMeta
from domain.mining import Clustering, SimilarityMatrix
from domain.paths import Path
from domain.reduction import quorum
from services.path_service import path_feature_bounds
from util.logging_setup import get_logger


logger = get_logger(__name__)

MAX_SWAP_ITERATIONS = 100
_EPS = 1e-12


def default_medoids(path_count: int) -> int:
    """ceil(sqrt(K)), at least 1."""
    return max(1, math.ceil(math.sqrt(path_count)))


def path_similarity(p_i: Path, p_j: Path, features: Sequence[FeatureMeta]) -> float:
    """Similarity of two paths over the whole feature space, in [0, 1]."""
    bounds_i = path_feature_bounds(p_i, features)
    bounds_j = path_feature_bounds(p_j, features)
    total = 0.0
    for f in range(len(features)):
        in_i, in_j = f in bounds_i, f in bounds_j
        if not in_i and not in_j:
            total += 1.0
        elif in_i and in_j:
            l_i, u_i, _ = bounds_i[f]
            l_j, u_j, _ = bounds_j[f]
            inter = min(u_i, u_j) - max(l_i, l_j)
            union = max(u_i, u_j) - min(l_i, l_j)
            if inter > 0 and union != 0:
                total += inter / union
    return total / len(features)


def _bounds_arrays(
    paths: Sequence[Path], features: Sequence[FeatureMeta]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, m = len(paths), len(features)
    present = np.zeros((n, m), dtype=bool)
    lower = np.zeros((n, m), dtype=np.float64)
    upper = np.zeros((n, m), dtype=np.float64)
    for row, path in enumerate(paths):
        for f, (lo, hi, _) in path_feature_bounds(path, features).items():
            present[row, f] = True
            lower[row, f] = lo
            upper[row, f] = hi
    return present, lower, upper


def build_similarity_matrix(
    paths: Sequence[Path], features: Sequence[FeatureMeta]
) -> SimilarityMatrix:
    """
    Pairwise path_similarity for all paths, one feature column at a time.

    The diagonal is set to 1; a path testing a feature at a single point
    would otherwise score below 1 against itself.
    """
    if not paths:
        raise ValueError("need at least one path")
    present, lower, upper = _bounds_arrays(paths, features)
    n, m = present.shape
    total = np.zeros((n, n), dtype=np.float64)

    for f in range(m):
        has = present[:, f]
        if not has.any():
            total += 1.0
            continue
        both = np.outer(has, has)
        neither = np.outer(~has, ~has)
        lo, hi = lower[:, f], upper[:, f]
        inter = np.minimum.outer(hi, hi) - np.maximum.outer(lo, lo)
        union = np.maximum.outer(hi, hi) - np.minimum.outer(lo, lo)
        counted = both & (inter > 0) & (union != 0)
        ratio = np.divide(inter, union, out=np.zeros_like(inter), where=counted)
        total += neither + ratio

    values = total / m
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 1.0)
    np.clip(values, 0.0, 1.0, out=values)
    return SimilarityMatrix(values)


def _pick(candidates: np.ndarray, rng: np.random.Generator) -> int:
    if candidates.size == 1:
        return int(candidates[0])
    return int(rng.choice(candidates))


def _build(distances: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """PAM BUILD: greedy medoid seeding; ties broken by the seeded generator."""
    totals = distances.sum(axis=1)
    first = _pick(np.flatnonzero(np.isclose(totals, totals.min(), atol=_EPS)), rng)
    medoids = [first]
    nearest = distances[:, first].copy()

    while len(medoids) < k:
        # gain of adding candidate c: sum_j max(0, nearest_j - d(j, c))
        gains = np.maximum(nearest[:, None] - distances, 0.0).sum(axis=0)
        gains[medoids] = -np.inf
        best = gains.max()
        chosen = _pick(np.flatnonzero(np.isclose(gains, best, atol=_EPS)), rng)
        medoids.append(chosen)
        nearest = np.minimum(nearest, distances[:, chosen])
    return sorted(medoids)


def _cost(distances: np.ndarray, medoids: Sequence[int]) -> float:
    return float(distances[:, list(medoids)].min(axis=1).sum())


def _swap(distances: np.ndarray, medoids: list[int]) -> list[int]:
    """Steepest-descent PAM SWAP, at most MAX_SWAP_ITERATIONS swaps."""
    n = distances.shape[0]
    current = _cost(distances, medoids)
    for _ in range(MAX_SWAP_ITERATIONS):
        best_cost, best_pair = current, None
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        for slot, m in enumerate(medoids):
            rest = [x for x in medoids if x != m]
            if rest:
                nearest_rest = distances[:, rest].min(axis=1)
            else:
                nearest_rest = np.full(n, np.inf)
            costs = np.minimum(nearest_rest[:, None], distances).sum(axis=0)
            costs[is_medoid] = np.inf
            h = int(np.argmin(costs))
            if costs[h] < best_cost - _EPS:
                best_cost, best_pair = float(costs[h]), (slot, h)
        if best_pair is None:
            break
        slot, h = best_pair
        medoids = sorted(medoids[:slot] + [h] + medoids[slot + 1:])
        current = best_cost
    return medoids


def kmedoids(matrix: SimilarityMatrix, n_medoids: int, seed: int = 0) -> Clustering:
    """
    PAM on distance 1 - similarity.

    Each path goes to its nearest medoid (lowest medoid index on ties);
    medoids are assigned to themselves.
    """
    n = matrix.n
    if not 1 <= n_medoids <= n:
        raise ValueError(f"n_medoids must be in [1, {n}], got {n_medoids}")
    distances = matrix.distances()
    rng = np.random.default_rng(seed)

    medoids = _build(distances, n_medoids, rng)
    medoids = _swap(distances, medoids)

    nearest = np.argmin(distances[:, medoids], axis=1)
    assignment = np.asarray(medoids, dtype=np.int64)[nearest]
    assignment[medoids] = medoids
    return Clustering(medoid_indices=list(medoids), assignment=assignment)


def kmedoids_reduce(
    matrix: SimilarityMatrix,
    paths: Sequence[Path],
    n_estimators: int,
    n_medoids: int,
    seed: int = 0,
    min_paths: Optional[int] = None,
) -> list[Path]:
    """
    Collect whole clusters, largest first, until the floor is met.

    The floor is min_paths if given, else the quorum of n_estimators.
    Returns the collected paths in their input order, or the input
    unchanged when all clusters together stay below the floor.
    """
    if matrix.n != len(paths):
        raise ValueError(f"matrix is {matrix.n}x{matrix.n} but {len(paths)} paths were given")
    floor = min_paths if min_paths is not None else quorum(n_estimators)
    if len(paths) <= floor:
        return list(paths)
    if n_medoids > len(paths):
        logger.warning(f"{n_medoids} medoids requested for {len(paths)} paths, using {len(paths)}")
        n_medoids = len(paths)

    clustering = kmedoids(matrix, n_medoids, seed)
    collected: list[int] = []
    for medoid, members in clustering.clusters():
        collected.extend(members)
        if len(collected) >= floor:
            break
    if len(collected) < floor:
        return list(paths)

    logger.debug(
        f"Clustering kept {len(collected)}/{len(paths)} paths "
        f"from {n_medoids} medoids (floor {floor})"
    )
    return [paths[i] for i in sorted(collected)]


def random_trim(
    paths: Sequence[Path], n_estimators: int, seed: int = 0, size: Optional[int] = None
) -> list[Path]:
    """
    Seeded uniform subset of exactly `size` paths (default: the quorum).

    Raises:
        ReductionError: "below quorum" when fewer paths than the quorum
            are given
    """
    q = quorum(n_estimators)
    if len(paths) < q:
        raise ReductionError(f"below quorum: {len(paths)} paths, quorum is {q}")
    target = size if size is not None else q
    if target < q:
        raise ReductionError(f"below quorum: trim size {target}, quorum is {q}")
    if len(paths) <= target:
        return list(paths)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(paths), size=target, replace=False))
    return [paths[int(i)] for i in chosen]
