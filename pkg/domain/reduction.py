"""
Reduction pipeline configuration and per-instance report.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


def quorum(n_estimators: int) -> int:
    """Smallest vote count that is a strict majority: floor(n / 2) + 1."""
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be >= 1, got {n_estimators}")
    return n_estimators // 2 + 1


class Technique(str, Enum):
    ASSOCIATION_RULES = "association_rules"
    CLUSTERING = "clustering"
    RANDOM_SELECTION = "random_selection"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PipelineConfig:
    """
    Toggles and parameters of the reduction pipeline.

    All toggles off is the identity pipeline. min_path_fraction raises the
    path floor to max(quorum, ceil(fraction * n_estimators)).
    """

    use_association_rules: bool = True
    use_clustering: bool = True
    use_random: bool = True
    min_support: float = 0.1
    max_itemset_size: int = 3
    n_medoids_override: Optional[int] = None
    min_path_fraction: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_support <= 1.0:
            raise ValueError(f"min_support must be in [0, 1], got {self.min_support}")
        if self.max_itemset_size < 2:
            raise ValueError("max_itemset_size must be >= 2")
        if self.n_medoids_override is not None and self.n_medoids_override < 1:
            raise ValueError("n_medoids_override must be >= 1")
        if self.min_path_fraction is not None and not 0.0 < self.min_path_fraction <= 1.0:
            raise ValueError("min_path_fraction must be in (0, 1]")

    @property
    def techniques(self) -> tuple[Technique, ...]:
        enabled = []
        if self.use_association_rules:
            enabled.append(Technique.ASSOCIATION_RULES)
        if self.use_clustering:
            enabled.append(Technique.CLUSTERING)
        if self.use_random:
            enabled.append(Technique.RANDOM_SELECTION)
        return tuple(enabled)


@dataclass(frozen=True)
class ReductionReport:
    original_feature_count: int
    reduced_feature_count: int
    original_path_count: int
    reduced_path_count: int
    feature_reduction: float
    path_reduction: float
    quorum: int
    techniques_fired: frozenset[Technique] = field(default_factory=frozenset)
    quorum_degraded: bool = False

    def to_dict(self) -> dict:
        return {
            "original_feature_count": self.original_feature_count,
            "reduced_feature_count": self.reduced_feature_count,
            "original_path_count": self.original_path_count,
            "reduced_path_count": self.reduced_path_count,
            "feature_reduction": self.feature_reduction,
            "path_reduction": self.path_reduction,
            "quorum": self.quorum,
            "techniques_fired": sorted(t.value for t in self.techniques_fired),
            "quorum_degraded": self.quorum_degraded,
        }
