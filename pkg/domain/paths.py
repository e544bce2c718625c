"""
Decision paths and feature ranges.
"""

from dataclasses import dataclass
from enum import Enum


class Relation(str, Enum):
    LE = "<="
    GT = ">"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class Condition:
    feature_index: int
    relation: Relation
    threshold: float

    def holds(self, value: float) -> bool:
        if self.relation is Relation.LE:
            return value <= self.threshold
        return value > self.threshold


@dataclass(frozen=True)
class Path:
    """Root-to-leaf condition record of one tree for one instance."""

    tree_index: int
    conditions: tuple[Condition, ...]
    voted_class: int

    @property
    def feature_set(self) -> frozenset[int]:
        return frozenset(c.feature_index for c in self.conditions)

    def is_satisfied_by(self, values: tuple[float, ...]) -> bool:
        return all(c.holds(values[c.feature_index]) for c in self.conditions)


@dataclass(frozen=True)
class FeatureRange:
    """
    Interval a feature may occupy without changing the retained traversals.

    The upper bound is always closed. The lower bound is open when it comes
    from a '>' condition and closed when it is the feature's global minimum.
    """

    feature_index: int
    lower: float
    upper: float
    lower_open: bool = True

    @property
    def upper_open(self) -> bool:
        return False

    def contains(self, value: float, tol: float = 0.0) -> bool:
        if self.lower_open:
            above = value > self.lower - tol
        else:
            above = value >= self.lower - tol
        return above and value <= self.upper + tol
