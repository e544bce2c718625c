"""
Bagged CART trainer.

Trains binary random forests with Gini impurity, optional bootstrap
sampling and per-split feature subsampling. Training is deterministic for a
fixed seed: every tree draws from its own child of one SeedSequence.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from domain.errors import DataError
from domain.forest import FeatureMeta, Forest, Internal, Leaf, TreeNode
from util.logging_setup import get_logger


logger = get_logger(__name__)

MaxFeatures = Union[str, float]


@dataclass(frozen=True)
class TrainingParams:
    """Random forest hyperparameters."""

    n_estimators: int = 100
    max_depth: Optional[int] = None
    max_features: MaxFeatures = "sqrt"
    min_samples_leaf: Union[int, float] = 1
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if isinstance(self.max_features, str):
            if self.max_features not in ("sqrt", "log2", "all"):
                raise ValueError(f"unknown max_features strategy '{self.max_features}'")
        elif not 0.0 < float(self.max_features) <= 1.0:
            raise ValueError("max_features fraction must be in (0, 1]")
        if isinstance(self.min_samples_leaf, float):
            if not 0.0 < self.min_samples_leaf < 1.0:
                raise ValueError("min_samples_leaf fraction must be in (0, 1)")
        elif self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")

    def features_per_split(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            m = int(math.sqrt(n_features))
        elif self.max_features == "log2":
            m = int(math.log2(n_features)) if n_features > 1 else 1
        elif self.max_features == "all":
            m = n_features
        else:
            m = int(float(self.max_features) * n_features)
        return min(n_features, max(1, m))

    def leaf_minimum(self, n_samples: int) -> int:
        if isinstance(self.min_samples_leaf, float):
            return max(1, math.ceil(self.min_samples_leaf * n_samples))
        return int(self.min_samples_leaf)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Scaled feature matrix, binary labels and the column metadata."""

    X: np.ndarray
    y: np.ndarray
    features: tuple[FeatureMeta, ...]


def _gini(ones: np.ndarray, n: np.ndarray) -> np.ndarray:
    p1 = ones / n
    return 1.0 - p1 ** 2 - (1.0 - p1) ** 2


class _TreeBuilder:
    """Grows one CART tree and accumulates its impurity decreases."""

    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        params: TrainingParams,
        min_leaf: int,
        rng: np.random.Generator,
    ) -> None:
        self.X = X
        self.y = y
        self.params = params
        self.min_leaf = min_leaf
        self.rng = rng
        self.n_features = X.shape[1]
        self.per_split = params.features_per_split(self.n_features)
        self.decrease = np.zeros(self.n_features, dtype=np.float64)

    def build(self, rows: np.ndarray, depth: int = 0) -> TreeNode:
        labels = self.y[rows]
        n = rows.size
        ones = int(labels.sum())
        leaf = Leaf((n - ones, ones))
        if ones == 0 or ones == n:
            return leaf
        if self.params.max_depth is not None and depth >= self.params.max_depth:
            return leaf
        if n < 2 * self.min_leaf:
            return leaf

        split = self._best_split(rows, ones)
        if split is None:
            return leaf
        feature, threshold, decrease = split
        self.decrease[feature] += decrease

        goes_left = self.X[rows, feature] <= threshold
        left = self.build(rows[goes_left], depth + 1)
        right = self.build(rows[~goes_left], depth + 1)
        return Internal(int(feature), float(threshold), left, right)

    def _best_split(self, rows: np.ndarray, ones_total: int) -> Optional[tuple[int, float, float]]:
        n = rows.size
        parent = n * (1.0 - (ones_total / n) ** 2 - (1.0 - ones_total / n) ** 2)
        order = self.rng.permutation(self.n_features)

        best: Optional[tuple[int, float, float]] = None
        best_weighted = math.inf
        for visited, feature in enumerate(order):
            # past the sampled features, keep looking only until one valid split exists
            if visited >= self.per_split and best is not None:
                break
            candidate = self._split_on(rows, int(feature), ones_total)
            if candidate is None:
                continue
            threshold, weighted = candidate
            if weighted < best_weighted:
                best_weighted = weighted
                best = (int(feature), threshold, parent - weighted)
        return best

    def _split_on(self, rows: np.ndarray, feature: int, ones_total: int) -> Optional[tuple[float, float]]:
        values = self.X[rows, feature]
        order = np.argsort(values, kind="mergesort")
        sorted_values = values[order]
        sorted_labels = self.y[rows][order]
        n = rows.size

        n_left = np.arange(1, n, dtype=np.float64)
        n_right = n - n_left
        ones_left = np.cumsum(sorted_labels)[:-1].astype(np.float64)
        ones_right = ones_total - ones_left

        valid = sorted_values[:-1] < sorted_values[1:]
        valid &= (n_left >= self.min_leaf) & (n_right >= self.min_leaf)
        if not valid.any():
            return None

        weighted = n_left * _gini(ones_left, n_left) + n_right * _gini(ones_right, n_right)
        weighted[~valid] = np.inf
        pos = int(np.argmin(weighted))

        low, high = sorted_values[pos], sorted_values[pos + 1]
        threshold = (low + high) / 2.0
        if threshold >= high or threshold < low:
            threshold = low
        return float(threshold), float(weighted[pos])


def train_forest(dataset: TrainingSet, params: TrainingParams) -> Forest:
    """
    Train a binary random forest.

    Args:
        dataset: Scaled training data with labels in {0, 1}
        params: Forest hyperparameters

    Returns:
        Forest with normalized mean-decrease-in-impurity importances

    Raises:
        DataError: Empty dataset or a single label class
    """
    X = np.asarray(dataset.X, dtype=np.float64)
    y = np.asarray(dataset.y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("empty dataset")
    if X.shape[0] != y.shape[0]:
        raise DataError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if X.shape[1] != len(dataset.features):
        raise DataError(f"{X.shape[1]} columns but {len(dataset.features)} feature descriptions")
    if not np.isin(y, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise DataError("degenerate labels")

    n_samples, n_features = X.shape
    min_leaf = params.leaf_minimum(n_samples)
    child_seeds = np.random.SeedSequence(params.seed).spawn(params.n_estimators)

    logger.info(
        f"Training forest: {params.n_estimators} trees, {n_samples} rows, "
        f"{n_features} features, max_features={params.max_features}, "
        f"max_depth={params.max_depth}, bootstrap={params.bootstrap}"
    )

    trees: list[TreeNode] = []
    importances = np.zeros(n_features, dtype=np.float64)
    for index, seed_seq in enumerate(child_seeds):
        rng = np.random.default_rng(seed_seq)
        if params.bootstrap:
            rows = rng.integers(0, n_samples, size=n_samples)
        else:
            rows = np.arange(n_samples)
        builder = _TreeBuilder(X, y, params, min_leaf, rng)
        trees.append(builder.build(rows))
        total = builder.decrease.sum()
        if total > 0:
            importances += builder.decrease / total
        if (index + 1) % 50 == 0:
            logger.info(f"Trained {index + 1}/{params.n_estimators} trees")

    if importances.sum() > 0:
        importances /= importances.sum()
    else:
        importances[:] = 1.0 / n_features

    return Forest(
        trees=tuple(trees),
        features=tuple(dataset.features),
        importances=tuple(float(w) for w in importances),
        n_estimators=params.n_estimators,
    )
