import json

import numpy as np
import pytest

from domain.errors import ModelError, ModelParseError
from domain.forest import FeatureKind, FeatureMeta, Forest, Internal, Leaf, TreeNode
from fixtures.synthetic import load_meta
from fixtures.toy import association_forest, intersection_forest
from services.dataset_service import ScalerState
from services.forest_trainer import TrainingParams
from services.model_store import (
    BUNDLE_FILE,
    FOREST_FILE,
    ModelBundle,
    deserialize_forest,
    forest_to_dict,
    load_bundle,
    save_bundle,
    serialize_forest,
)


def _random_tree(rng: np.random.Generator, n_features: int, depth: int) -> TreeNode:
    if depth == 0 or rng.random() < 0.25:
        counts = rng.integers(0, 50, size=2)
        counts[rng.integers(0, 2)] += 1
        return Leaf((int(counts[0]), int(counts[1])))
    return Internal(
        int(rng.integers(0, n_features)),
        float(rng.normal()),
        _random_tree(rng, n_features, depth - 1),
        _random_tree(rng, n_features, depth - 1),
    )


def _random_forest(seed: int) -> Forest:
    rng = np.random.default_rng(seed)
    features = (
        FeatureMeta("x", FeatureKind.NUMERIC, -1.0, 1.0),
        FeatureMeta("colour_red", FeatureKind.ONEHOT, 0.0, 1.0, group="colour", category="red"),
        FeatureMeta("colour_grün", FeatureKind.ONEHOT, 0.0, 1.0, group="colour", category="grün"),
        FeatureMeta("size", FeatureKind.ORDINAL, -1.0, 1.0, categories=("S", "M", "L")),
    )
    weights = rng.dirichlet(np.ones(len(features)))
    n = int(rng.integers(1, 8))
    return Forest(
        trees=tuple(_random_tree(rng, len(features), 5) for _ in range(n)),
        features=features,
        importances=tuple(float(w) for w in weights),
    )


class TestInterchangeFormat:

    def test_round_trip_is_byte_identical(self):
        for seed in range(100):
            data = serialize_forest(_random_forest(seed))
            assert serialize_forest(deserialize_forest(data)) == data

    def test_round_trip_preserves_forest(self):
        forest = _random_forest(5)
        assert deserialize_forest(serialize_forest(forest)) == forest

    def test_non_ascii_names_stay_utf8(self):
        data = serialize_forest(_random_forest(0))
        assert "grün".encode("utf-8") in data

    def test_error_names_node_path(self):
        document = forest_to_dict(association_forest())
        document["trees"][3]["left"] = {"leaf": [0, 0]}
        with pytest.raises(ModelParseError) as info:
            deserialize_forest(json.dumps(document).encode("utf-8"))
        assert info.value.path == "trees[3].left.leaf"

    def test_feature_index_out_of_range(self):
        document = forest_to_dict(association_forest())
        document["trees"][0]["feature"] = 9
        with pytest.raises(ModelParseError) as info:
            deserialize_forest(json.dumps(document).encode("utf-8"))
        assert info.value.path == "trees[0].feature"

    def test_unknown_feature_kind(self):
        document = forest_to_dict(association_forest())
        document["features"][1]["kind"] = "fuzzy"
        with pytest.raises(ModelParseError, match=r"features\[1\].kind"):
            deserialize_forest(json.dumps(document).encode("utf-8"))

    @pytest.mark.parametrize("declared", [0, 4, 7])
    def test_tree_count_mismatch(self, declared):
        document = forest_to_dict(intersection_forest())
        document["n_estimators"] = declared
        with pytest.raises(ModelParseError) as info:
            deserialize_forest(json.dumps(document).encode("utf-8"))
        assert info.value.path == "n_estimators"

    def test_zero_estimators_rejected_on_construction(self):
        forest = intersection_forest()
        with pytest.raises(ModelError):
            Forest(forest.trees, forest.features, forest.importances, n_estimators=0)

    def test_not_json(self):
        with pytest.raises(ModelParseError) as info:
            deserialize_forest(b"{trees: nope")
        assert info.value.path == "$"
        assert info.value.error_code == "MODEL_PARSE"


def _banknote_bundle() -> ModelBundle:
    meta = load_meta("banknote")
    columns = meta.model_columns()
    forest = Forest(
        trees=(
            Internal(0, 0.1, Leaf((1, 9)), Leaf((8, 2))),
            Internal(2, -0.3, Leaf((5, 5)), Leaf((7, 0))),
            Leaf((3, 4)),
        ),
        features=tuple(columns),
        importances=(0.4, 0.1, 0.3, 0.2),
    )
    scaler = ScalerState(
        columns=tuple(c.name for c in columns),
        mins=(-7.0, -13.7, -5.3, -8.5),
        maxs=(6.8, 12.9, 17.9, 2.4),
        scaled=(True, True, True, True),
    )
    params = TrainingParams(n_estimators=3, max_depth=10, max_features=0.75, seed=4)
    return ModelBundle(forest, meta, scaler, params, holdout_f1=0.9125, trained_rows=120)


class TestModelBundle:

    def test_save_and_load(self, tmp_path):
        bundle = _banknote_bundle()
        save_bundle(bundle, tmp_path / "model")
        loaded = load_bundle(tmp_path / "model")
        assert loaded.forest == bundle.forest
        assert loaded.meta == bundle.meta
        assert loaded.scaler.to_dict() == bundle.scaler.to_dict()
        assert loaded.params == bundle.params
        assert loaded.holdout_f1 == pytest.approx(0.9125)
        assert loaded.trained_rows == 120

    def test_unlimited_depth_survives(self, tmp_path):
        bundle = _banknote_bundle()
        params = TrainingParams(n_estimators=3, max_depth=None)
        save_bundle(ModelBundle(bundle.forest, bundle.meta, bundle.scaler, params), tmp_path)
        loaded = load_bundle(tmp_path)
        assert loaded.params.max_depth is None
        assert loaded.holdout_f1 is None

    def test_missing_bundle(self, tmp_path):
        with pytest.raises(ModelError, match="no model bundle"):
            load_bundle(tmp_path / "absent")

    def test_missing_section(self, tmp_path):
        save_bundle(_banknote_bundle(), tmp_path)
        text = (tmp_path / BUNDLE_FILE).read_text(encoding="utf-8")
        (tmp_path / BUNDLE_FILE).write_text(text.replace("[training]", "[trainin]"), encoding="utf-8")
        with pytest.raises(ModelError, match=r"\[training\]"):
            load_bundle(tmp_path)

    def test_forest_columns_must_match_scaler(self, tmp_path):
        save_bundle(_banknote_bundle(), tmp_path)
        document = json.loads((tmp_path / FOREST_FILE).read_text(encoding="utf-8"))
        document["features"][0]["name"] = "varianz"
        (tmp_path / FOREST_FILE).write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(ModelError, match="scaler columns"):
            load_bundle(tmp_path)
