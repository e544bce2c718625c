"""
Types shared by the path reduction techniques (association rules, clustering).
"""

from dataclasses import dataclass

import numpy as np

from domain.paths import Path


@dataclass(frozen=True)
class PathItemset:
    """Features occurring in a path; condition values are dropped."""

    path_index: int
    items: frozenset[int]


@dataclass(frozen=True)
class AssocRule:
    """Association rule antecedent => consequent over feature indices."""

    antecedent: frozenset[int]
    consequent: frozenset[int]
    support_antecedent: float
    confidence: float

    def __str__(self) -> str:
        lhs = ",".join(f"f{i}" for i in sorted(self.antecedent))
        rhs = ",".join(f"f{i}" for i in sorted(self.consequent))
        return f"{{{lhs}}} => {{{rhs}}} (conf={self.confidence:.3f})"


@dataclass(frozen=True)
class RuleReduction:
    """Successful association-rule reduction."""

    reduced_paths: list[Path]
    feature_set: frozenset[int]


@dataclass(frozen=True)
class NoReduction:
    """Rules exhausted before the surviving paths reached the quorum."""

    reason: str


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric n x n path similarities in [0, 1] with unit diagonal."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def distances(self) -> np.ndarray:
        return 1.0 - self.values


@dataclass(frozen=True, eq=False)
class Clustering:
    """k-medoids result; assignment[i] is the medoid path index of path i."""

    medoid_indices: list[int]
    assignment: np.ndarray

    def clusters(self) -> list[tuple[int, list[int]]]:
        """(medoid, members) sorted by size descending, ties by medoid index."""
        groups = {m: [] for m in self.medoid_indices}
        for path_index, medoid in enumerate(self.assignment.tolist()):
            groups[medoid].append(path_index)
        return sorted(groups.items(), key=lambda item: (-len(item[1]), item[0]))
