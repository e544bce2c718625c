"""
Path extraction and feature-range intersection.

extract_paths collects the traversal record of every tree that votes the
forest's class. intersect_ranges folds the per-path bounds of a path set
into one range per feature; any value vector inside those ranges follows
the same paths through the same trees.
"""

from typing import Iterable, Sequence

from domain.errors import PathError
from domain.forest import FeatureMeta, Forest, Instance, check_instance
from domain.paths import FeatureRange, Path, Relation
from services.forest_service import decision_path, forest_predict
from util.logging_setup import get_logger


logger = get_logger(__name__)

# (lower, upper, lower_open)
Bounds = tuple[float, float, bool]


def extract_paths(forest: Forest, instance: Instance) -> list[Path]:
    """
    Decision paths of the trees voting the predicted class, in tree order.

    Dissenting trees contribute nothing.
    """
    check_instance(forest, instance)
    prediction = forest_predict(forest, instance)
    paths: list[Path] = []
    for tree_index, tree in enumerate(forest.trees):
        conditions, leaf = decision_path(tree, instance.values)
        if leaf.vote != prediction.predicted_class:
            continue
        paths.append(Path(tree_index, conditions, leaf.vote))
    logger.debug(
        f"Extracted {len(paths)}/{forest.n_estimators} paths for class {prediction.predicted_class}"
    )
    return paths


def features_of(paths: Iterable[Path]) -> frozenset[int]:
    """Union of the feature indices used by the paths."""
    used: set[int] = set()
    for path in paths:
        used.update(path.feature_set)
    return frozenset(used)


def path_feature_bounds(path: Path, features: Sequence[FeatureMeta]) -> dict[int, Bounds]:
    """
    Per-feature bounds of one path.

    lower = max of the '>' thresholds (global_min, closed, if none),
    upper = min of the '<=' thresholds (global_max if none). Features not
    tested by the path are absent.

    Raises:
        PathError: "inconsistent path" when a feature's bounds cross
    """
    lowers: dict[int, float] = {}
    uppers: dict[int, float] = {}
    for condition in path.conditions:
        i = condition.feature_index
        if condition.relation is Relation.GT:
            lowers[i] = max(lowers.get(i, condition.threshold), condition.threshold)
        else:
            uppers[i] = min(uppers.get(i, condition.threshold), condition.threshold)

    bounds: dict[int, Bounds] = {}
    for i in sorted(path.feature_set):
        meta = features[i]
        if i in lowers:
            lower, lower_open = lowers[i], True
        else:
            lower, lower_open = meta.global_min, False
        upper = uppers.get(i, meta.global_max)
        if lower >= upper if lower_open else lower > upper:
            raise PathError(
                f"inconsistent path: tree {path.tree_index} bounds '{meta.name}' to "
                f"({lower}, {upper}]"
            )
        bounds[i] = (lower, upper, lower_open)
    return bounds


def intersect_ranges(paths: Sequence[Path], features: Sequence[FeatureMeta]) -> list[FeatureRange]:
    """
    Intersect the per-path bounds feature by feature.

    Returns ranges sorted by feature index, only for features some path
    tests.

    Raises:
        PathError: empty path set, or "inconsistent path set" when a
            feature's intersection is empty
    """
    if not paths:
        raise PathError("cannot intersect an empty path set")

    merged: dict[int, Bounds] = {}
    for path in paths:
        for i, (lower, upper, lower_open) in path_feature_bounds(path, features).items():
            if i not in merged:
                merged[i] = (lower, upper, lower_open)
                continue
            cur_lower, cur_upper, cur_open = merged[i]
            if lower > cur_lower:
                cur_lower, cur_open = lower, lower_open
            elif lower == cur_lower:
                cur_open = cur_open or lower_open
            merged[i] = (cur_lower, min(cur_upper, upper), cur_open)

    ranges: list[FeatureRange] = []
    for i in sorted(merged):
        lower, upper, lower_open = merged[i]
        if lower >= upper if lower_open else lower > upper:
            raise PathError(
                f"inconsistent path set: '{features[i].name}' has empty range ({lower}, {upper}]"
            )
        ranges.append(FeatureRange(i, lower, upper, lower_open))
    return ranges
