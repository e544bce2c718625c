"""
Reduction pipeline.

extract paths -> association rules -> k-medoids -> random selection.
Each enabled technique only runs while the path set is above the floor,
and none of them takes it below. The floor is the quorum of the forest,
raised by PipelineConfig.min_path_fraction.
"""

import math
from dataclasses import dataclass
from typing import Optional

from app.state_machine import ReductionStateMachine
from domain.errors import ReductionError
from domain.events import (
    PathsExtracted,
    PipelineEvent,
    ReductionFinished,
    TechniqueApplied,
    TechniqueSkipped,
)
from domain.forest import Forest, Instance, check_instance
from domain.mining import NoReduction
from domain.paths import Path
from domain.reduction import PipelineConfig, ReductionReport, Technique, quorum
from services.association_service import itemsets_from_paths, mine_rules, reduce_by_rules
from services.cluster_service import (
    build_similarity_matrix,
    default_medoids,
    kmedoids_reduce,
    random_trim,
)
from services.forest_service import Prediction, forest_predict
from services.path_service import extract_paths, features_of
from util.logging_setup import get_logger


logger = get_logger(__name__)

__all__ = ["ReductionResult", "path_floor", "quorum", "reduce"]


def path_floor(n_estimators: int, min_path_fraction: Optional[float] = None) -> int:
    """max(quorum, ceil(fraction * N)); the fraction is optional."""
    floor = quorum(n_estimators)
    if min_path_fraction is not None:
        floor = max(floor, math.ceil(min_path_fraction * n_estimators - 1e-9))
    return floor


@dataclass(frozen=True)
class ReductionResult:
    """Reduced paths plus everything needed to explain and compare them."""

    paths: list[Path]
    report: ReductionReport
    prediction: Prediction
    full_paths: list[Path]
    events: tuple[PipelineEvent, ...]


class _Run:
    """State of one reduce() call."""

    def __init__(self, forest: Forest, config: PipelineConfig, floor: int) -> None:
        self.forest = forest
        self.config = config
        self.floor = floor
        self.machine = ReductionStateMachine()

    def record(self, event: PipelineEvent) -> None:
        if self.machine.transition(event) is None:
            raise ReductionError(
                f"pipeline out of order: {type(event).__name__} in stage {self.machine.current_stage}"
            )

    def skip(self, technique: Technique, reason: str) -> None:
        self.record(TechniqueSkipped(technique, reason))

    def association_rules(self, paths: list[Path]) -> list[Path]:
        rules = mine_rules(
            itemsets_from_paths(paths), self.config.min_support, self.config.max_itemset_size
        )
        outcome = reduce_by_rules(paths, rules, self.floor)
        if isinstance(outcome, NoReduction):
            self.skip(Technique.ASSOCIATION_RULES, outcome.reason)
            return paths
        self.record(
            TechniqueApplied(
                Technique.ASSOCIATION_RULES,
                len(paths),
                len(outcome.reduced_paths),
                len(outcome.feature_set),
            )
        )
        return outcome.reduced_paths

    def clustering(self, paths: list[Path]) -> list[Path]:
        matrix = build_similarity_matrix(paths, self.forest.features)
        n_medoids = self.config.n_medoids_override or default_medoids(len(paths))
        reduced = kmedoids_reduce(
            matrix,
            paths,
            self.forest.n_estimators,
            min(n_medoids, len(paths)),
            seed=self.config.seed,
            min_paths=self.floor,
        )
        self.record(
            TechniqueApplied(
                Technique.CLUSTERING, len(paths), len(reduced), len(features_of(reduced))
            )
        )
        return reduced

    def random_selection(self, paths: list[Path]) -> list[Path]:
        reduced = random_trim(paths, self.forest.n_estimators, self.config.seed, size=self.floor)
        self.record(
            TechniqueApplied(
                Technique.RANDOM_SELECTION, len(paths), len(reduced), len(features_of(reduced))
            )
        )
        return reduced


def _ratio(kept: int, total: int) -> float:
    return 1.0 - kept / total if total else 0.0


def reduce(forest: Forest, instance: Instance, config: PipelineConfig) -> ReductionResult:
    """
    Reduce the majority paths of one instance.

    When fewer than a quorum of trees vote the predicted class (an exact
    split on an even forest), nothing is reduced, the report's quorum
    becomes K and quorum_degraded is set.
    """
    check_instance(forest, instance)
    prediction = forest_predict(forest, instance)
    full_paths = extract_paths(forest, instance)
    n = forest.n_estimators
    k = len(full_paths)

    q = quorum(n)
    degraded = k < q
    floor = k if degraded else min(path_floor(n, config.min_path_fraction), k)
    if degraded:
        logger.warning(f"Only {k} of {n} trees vote class {prediction.predicted_class}; no reduction")
        q = k

    run = _Run(forest, config, floor)
    run.record(PathsExtracted(prediction.predicted_class, k, n))

    steps = (
        (Technique.ASSOCIATION_RULES, config.use_association_rules, run.association_rules),
        (Technique.CLUSTERING, config.use_clustering, run.clustering),
        (Technique.RANDOM_SELECTION, config.use_random, run.random_selection),
    )
    paths = list(full_paths)
    for technique, enabled, apply in steps:
        if not enabled:
            run.skip(technique, "disabled")
        elif degraded:
            run.skip(technique, "quorum degraded")
        elif len(paths) <= floor:
            run.skip(technique, f"{len(paths)} paths already at floor {floor}")
        else:
            paths = apply(paths)

    full_features = features_of(full_paths)
    kept_features = features_of(paths)
    run.record(ReductionFinished(len(paths), len(kept_features)))

    events = run.machine.history
    fired = frozenset(
        e.technique for e in events if isinstance(e, TechniqueApplied) and e.fired
    )
    report = ReductionReport(
        original_feature_count=len(full_features),
        reduced_feature_count=len(kept_features),
        original_path_count=k,
        reduced_path_count=len(paths),
        feature_reduction=_ratio(len(kept_features), len(full_features)),
        path_reduction=_ratio(len(paths), k),
        quorum=q,
        techniques_fired=fired,
        quorum_degraded=degraded,
    )
    logger.debug(
        f"Reduced {k} -> {len(paths)} paths, {len(full_features)} -> {len(kept_features)} "
        f"features ({', '.join(sorted(t.value for t in fired)) or 'no technique fired'})"
    )
    return ReductionResult(paths, report, prediction, full_paths, events)
