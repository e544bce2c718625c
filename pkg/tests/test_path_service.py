import numpy as np
import pytest

from domain.errors import DataError, PathError
from domain.forest import Forest, Instance
from domain.paths import Condition, FeatureRange, Path, Relation
from fixtures.toy import (
    association_forest,
    association_instance,
    chain_tree,
    identity_scaler,
    intersection_forest,
    intersection_instance,
    numeric_features,
    VOTE_ZERO,
)
from services.interpretation_service import compose_rule, render_rule
from services.path_service import (
    extract_paths,
    features_of,
    intersect_ranges,
    path_feature_bounds,
)


def _path(tree_index: int, *conditions: tuple[int, Relation, float]) -> Path:
    return Path(tree_index, tuple(Condition(*c) for c in conditions), 1)


class TestExtractPaths:

    def test_only_majority_trees(self):
        base = association_forest()
        forest = Forest(
            trees=base.trees + (chain_tree((0,), VOTE_ZERO),),
            features=base.features,
            importances=base.importances,
        )
        paths = extract_paths(forest, association_instance())
        assert [p.tree_index for p in paths] == [0, 1, 2, 3, 4]
        assert all(p.voted_class == 1 for p in paths)

    def test_paths_hold_for_the_instance(self):
        instance = association_instance()
        for path in extract_paths(association_forest(), instance):
            assert path.is_satisfied_by(instance.values)

    def test_feature_sets(self):
        paths = extract_paths(association_forest(), association_instance())
        assert [sorted(p.feature_set) for p in paths] == [[0, 1, 3], [0, 2, 3], [0, 1, 3], [2, 3], [3]]
        assert features_of(paths) == frozenset({0, 1, 2, 3})

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            extract_paths(association_forest(), Instance.of([0.0]))


class TestIntersection:

    def test_three_toy_paths(self):
        forest = intersection_forest()
        paths = extract_paths(forest, intersection_instance())
        assert intersect_ranges(paths, forest.features) == [FeatureRange(0, 0.469, 0.6, True)]

    def test_rendered_toy_range(self):
        forest = intersection_forest()
        paths = extract_paths(forest, intersection_instance())
        ranges = intersect_ranges(paths, forest.features)
        rule = compose_rule(ranges, forest, features_of(paths), identity_scaler(forest.features), "1")
        assert render_rule(rule) == "if 0.47 ≤ f1 ≤ 0.6 then 1"

    def test_untested_lower_bound_is_closed_global_min(self):
        features = numeric_features(["f1"], 0.0, 1.0)
        bounds = path_feature_bounds(_path(0, (0, Relation.LE, 0.6)), features)
        assert bounds == {0: (0.0, 0.6, False)}

    def test_repeated_conditions_tighten(self):
        features = numeric_features(["f1"], 0.0, 1.0)
        path = _path(0, (0, Relation.GT, 0.1), (0, Relation.LE, 0.8), (0, Relation.GT, 0.3))
        assert path_feature_bounds(path, features) == {0: (0.3, 0.8, True)}

    def test_equal_lowers_stay_open(self):
        features = numeric_features(["f1"], 0.0, 1.0)
        paths = [_path(0, (0, Relation.LE, 0.5)), _path(1, (0, Relation.GT, 0.0))]
        assert intersect_ranges(paths, features) == [FeatureRange(0, 0.0, 0.5, True)]

    def test_contains_respects_openness(self):
        rng = FeatureRange(0, 0.469, 0.6, True)
        assert not rng.contains(0.469)
        assert rng.contains(0.6)
        assert FeatureRange(0, 0.0, 0.5, False).contains(0.0)

    def test_untested_features_are_absent(self):
        features = numeric_features(["f1", "f2", "f3"])
        ranges = intersect_ranges([_path(0, (2, Relation.LE, 0.0))], features)
        assert [r.feature_index for r in ranges] == [2]


class TestInconsistency:

    def test_contradictory_path(self):
        features = numeric_features(["f1"])
        path = _path(4, (0, Relation.GT, 0.5), (0, Relation.LE, 0.3))
        with pytest.raises(PathError, match="inconsistent path: tree 4"):
            path_feature_bounds(path, features)

    def test_contradictory_path_set(self):
        features = numeric_features(["f1"])
        paths = [_path(0, (0, Relation.LE, 0.2)), _path(1, (0, Relation.GT, 0.5))]
        with pytest.raises(PathError, match="inconsistent path set"):
            intersect_ranges(paths, features)

    def test_empty_path_set(self):
        with pytest.raises(PathError):
            intersect_ranges([], numeric_features(["f1"]))


GRID = np.arange(-40, 41) / 40


def _random_path(rng: np.random.Generator, x: np.ndarray, tree_index: int) -> Path:
    """Conditions a traversal of x could produce: thresholds on the 1/20 grid."""
    conditions = []
    for _ in range(int(rng.integers(1, 6))):
        feature = int(rng.integers(0, len(x)))
        threshold = float(rng.integers(-19, 20) * 2 / 40)
        relation = Relation.LE if x[feature] <= threshold else Relation.GT
        conditions.append(Condition(feature, relation, threshold))
    return Path(tree_index, tuple(conditions), 1)


def _range_of(ranges: list[FeatureRange], feature: int) -> FeatureRange:
    return next(r for r in ranges if r.feature_index == feature)


class TestAgainstGrid:

    def test_path_bounds_admit_exactly_the_satisfying_points(self):
        features = numeric_features(["f1"])
        rng = np.random.default_rng(5)
        for tree_index in range(200):
            x = rng.uniform(-1, 1, size=1)
            path = _random_path(rng, x, tree_index)
            lower, upper, lower_open = path_feature_bounds(path, features)[0]
            allowed = FeatureRange(0, lower, upper, lower_open)
            for v in GRID:
                assert path.is_satisfied_by((float(v),)) == allowed.contains(float(v)), (path, v)

    def test_intersection_admits_exactly_the_common_points(self):
        features = numeric_features(["f1"])
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = rng.uniform(-1, 1, size=1)
            paths = [_random_path(rng, x, t) for t in range(int(rng.integers(1, 8)))]
            (merged,) = intersect_ranges(paths, features)
            for v in GRID:
                inside = all(p.is_satisfied_by((float(v),)) for p in paths)
                assert inside == merged.contains(float(v))

    def test_fold_order_does_not_matter(self):
        features = numeric_features(["f1", "f2", "f3"])
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.uniform(-1, 1, size=3)
            paths = [_random_path(rng, x, t) for t in range(6)]
            shuffled = [paths[i] for i in rng.permutation(len(paths))]
            assert intersect_ranges(shuffled, features) == intersect_ranges(paths, features)

    def test_more_paths_never_widen_a_range(self):
        features = numeric_features(["f1", "f2", "f3"])
        rng = np.random.default_rng(8)
        for _ in range(100):
            x = rng.uniform(-1, 1, size=3)
            paths = [_random_path(rng, x, t) for t in range(8)]
            subset = intersect_ranges(paths[:4], features)
            superset = intersect_ranges(paths, features)
            for wide in subset:
                narrow = _range_of(superset, wide.feature_index)
                assert narrow.lower >= wide.lower
                assert narrow.upper <= wide.upper
                # the traversed point stays inside
                assert narrow.contains(float(x[wide.feature_index]))
