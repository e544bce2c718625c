"""
Forest data model.

Features, tree nodes, the forest itself and the instance vector.
All types are immutable; a Forest can be shared between threads.
Split convention: value <= threshold goes left, value > threshold goes right.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from domain.errors import DataError, ModelError


class FeatureKind(str, Enum):
    """How a model column relates to the original dataset column."""

    NUMERIC = "numeric"
    ONEHOT = "onehot"
    ORDINAL = "ordinal"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FeatureMeta:
    """
    One model column.

    global_min / global_max are the post-scaling bounds of the column.
    One-hot members carry their group (source feature) and category;
    ordinal features carry their ordered categories.
    """

    name: str
    kind: FeatureKind
    global_min: float
    global_max: float
    group: Optional[str] = None
    category: Optional[str] = None
    categories: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if not self.global_min < self.global_max:
            raise ModelError(
                f"feature '{self.name}': global_min must be < global_max "
                f"({self.global_min} >= {self.global_max})"
            )
        if self.kind is FeatureKind.ONEHOT and (not self.group or self.category is None):
            raise ModelError(f"feature '{self.name}': one-hot member needs group and category")
        if self.kind is FeatureKind.ORDINAL:
            if not self.categories:
                raise ModelError(f"feature '{self.name}': ordinal feature needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ModelError(f"feature '{self.name}': ordinal categories must be distinct")


@dataclass(frozen=True, slots=True)
class Leaf:
    """Terminal node holding (class 0, class 1) sample counts."""

    class_counts: tuple[int, int]

    @property
    def vote(self) -> int:
        # ties go to class 1 (P(C=1|x) >= 0.5)
        zeros, ones = self.class_counts
        return 1 if ones >= zeros else 0


@dataclass(frozen=True, slots=True)
class Internal:
    """Split node: value <= threshold -> left, value > threshold -> right."""

    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Internal, Leaf]


@dataclass(frozen=True)
class Forest:
    """Bagged ensemble of binary decision trees."""

    trees: tuple[TreeNode, ...]
    features: tuple[FeatureMeta, ...]
    importances: tuple[float, ...]
    n_estimators: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_estimators is None:
            object.__setattr__(self, "n_estimators", len(self.trees))
        if self.n_estimators < 1 or len(self.trees) != self.n_estimators:
            raise ModelError(
                f"forest declares {self.n_estimators} estimators but holds {len(self.trees)} trees"
            )
        if len(self.importances) != len(self.features):
            raise ModelError("importances must have one entry per feature")
        if any(w < 0 for w in self.importances):
            raise ModelError("importances must be non-negative")
        if not math.isclose(sum(self.importances), 1.0, abs_tol=1e-9):
            raise ModelError(f"importances must sum to 1 (got {sum(self.importances)!r})")

    @property
    def n_features(self) -> int:
        return len(self.features)


@dataclass(frozen=True)
class Instance:
    """Scaled value vector indexed like Forest.features."""

    values: tuple[float, ...]

    @classmethod
    def of(cls, values: Sequence[float]) -> "Instance":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)


def check_instance(forest: Forest, instance: Instance) -> None:
    """
    Validate an instance against a forest.

    Raises:
        DataError: On dimensionality mismatch
    """
    if len(instance) != forest.n_features:
        raise DataError(
            f"instance has {len(instance)} values, forest expects {forest.n_features}"
        )
