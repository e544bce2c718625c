"""
Forest interchange format and model bundles.

serialize_forest / deserialize_forest implement the JSON schema:

    {"n_estimators": int,
     "features": [{"name", "kind", "group"?, "category"?, "categories"?, "min", "max"}],
     "importances": [real],
     "trees": [node]}
    node = {"feature": int, "threshold": real, "left": node, "right": node}
         | {"leaf": [int, int]}

A model bundle is a directory holding forest.json plus bundle.toml
(dataset metadata, scaler state, training parameters).
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from domain.errors import DataError, ModelError, ModelParseError
from domain.forest import FeatureKind, FeatureMeta, Forest, Internal, Leaf, TreeNode
from services.dataset_service import DatasetMeta, ScalerState
from services.forest_trainer import TrainingParams
from util.config_writer import read_toml, write_toml
from util.logging_setup import get_logger


logger = get_logger(__name__)

FOREST_FILE = "forest.json"
BUNDLE_FILE = "bundle.toml"
BUNDLE_FORMAT = 1


def _feature_to_dict(meta: FeatureMeta) -> dict[str, Any]:
    entry: dict[str, Any] = {"name": meta.name, "kind": meta.kind.value}
    if meta.group is not None:
        entry["group"] = meta.group
    if meta.category is not None:
        entry["category"] = meta.category
    if meta.categories is not None:
        entry["categories"] = list(meta.categories)
    entry["min"] = meta.global_min
    entry["max"] = meta.global_max
    return entry


def _node_to_dict(node: TreeNode) -> dict[str, Any]:
    if isinstance(node, Leaf):
        return {"leaf": [node.class_counts[0], node.class_counts[1]]}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def forest_to_dict(forest: Forest) -> dict[str, Any]:
    return {
        "n_estimators": forest.n_estimators,
        "features": [_feature_to_dict(m) for m in forest.features],
        "importances": list(forest.importances),
        "trees": [_node_to_dict(t) for t in forest.trees],
    }


def serialize_forest(forest: Forest) -> bytes:
    """UTF-8 JSON; floats use repr, which round-trips exactly."""
    document = forest_to_dict(forest)
    return json.dumps(
        document, ensure_ascii=False, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return (_is_int(value) or isinstance(value, float)) and math.isfinite(value)


def _parse_feature(entry: Any, path: str) -> FeatureMeta:
    if not isinstance(entry, dict):
        raise ModelParseError(path, "feature must be an object")
    for key in ("name", "kind", "min", "max"):
        if key not in entry:
            raise ModelParseError(path, f"missing \"{key}\"")
    if not isinstance(entry["name"], str):
        raise ModelParseError(f"{path}.name", "must be a string")
    try:
        kind = FeatureKind(entry["kind"])
    except ValueError:
        raise ModelParseError(f"{path}.kind", f"unknown kind {entry['kind']!r}") from None
    if not _is_real(entry["min"]) or not _is_real(entry["max"]):
        raise ModelParseError(path, "min and max must be finite numbers")
    categories = entry.get("categories")
    if categories is not None:
        if not isinstance(categories, list) or not all(isinstance(c, str) for c in categories):
            raise ModelParseError(f"{path}.categories", "must be a list of strings")
        categories = tuple(categories)
    try:
        return FeatureMeta(
            name=entry["name"],
            kind=kind,
            global_min=float(entry["min"]),
            global_max=float(entry["max"]),
            group=entry.get("group"),
            category=entry.get("category"),
            categories=categories,
        )
    except ModelError as e:
        raise ModelParseError(path, e.error_hint) from e


def _parse_node(node: Any, path: str, n_features: int) -> TreeNode:
    if not isinstance(node, dict):
        raise ModelParseError(path, "node must be an object")
    if "leaf" in node:
        counts = node["leaf"]
        if (
            not isinstance(counts, list)
            or len(counts) != 2
            or not all(_is_int(c) and c >= 0 for c in counts)
        ):
            raise ModelParseError(f"{path}.leaf", "must be two non-negative integers")
        if counts[0] == 0 and counts[1] == 0:
            raise ModelParseError(f"{path}.leaf", "class counts are both zero")
        return Leaf((counts[0], counts[1]))

    for key in ("feature", "threshold", "left", "right"):
        if key not in node:
            raise ModelParseError(path, f"internal node missing \"{key}\"")
    feature = node["feature"]
    if not _is_int(feature) or not 0 <= feature < n_features:
        raise ModelParseError(f"{path}.feature", f"index {feature!r} out of range")
    if not _is_real(node["threshold"]):
        raise ModelParseError(f"{path}.threshold", "must be a finite number")
    return Internal(
        feature_index=feature,
        threshold=float(node["threshold"]),
        left=_parse_node(node["left"], f"{path}.left", n_features),
        right=_parse_node(node["right"], f"{path}.right", n_features),
    )


def forest_from_dict(document: Any) -> Forest:
    if not isinstance(document, dict):
        raise ModelParseError("$", "document must be an object")
    for key in ("n_estimators", "features", "importances", "trees"):
        if key not in document:
            raise ModelParseError("$", f"missing \"{key}\"")
    if not isinstance(document["features"], list) or not document["features"]:
        raise ModelParseError("features", "must be a non-empty list")
    features = tuple(
        _parse_feature(entry, f"features[{i}]") for i, entry in enumerate(document["features"])
    )
    importances = document["importances"]
    if not isinstance(importances, list) or not all(_is_real(w) for w in importances):
        raise ModelParseError("importances", "must be a list of numbers")
    trees_raw = document["trees"]
    if not isinstance(trees_raw, list):
        raise ModelParseError("trees", "must be a list")
    n_estimators = document["n_estimators"]
    if not _is_int(n_estimators):
        raise ModelParseError("n_estimators", "must be an integer")
    if n_estimators != len(trees_raw):
        raise ModelParseError(
            "n_estimators", f"declares {n_estimators} trees but the document holds {len(trees_raw)}"
        )
    trees = tuple(
        _parse_node(node, f"trees[{i}]", len(features)) for i, node in enumerate(trees_raw)
    )
    try:
        return Forest(
            trees=trees,
            features=features,
            importances=tuple(float(w) for w in importances),
            n_estimators=n_estimators,
        )
    except ModelError as e:
        raise ModelParseError("$", e.error_hint) from e


def deserialize_forest(data: bytes) -> Forest:
    """
    Parse a forest document.

    Raises:
        ModelParseError: With the path of the offending node, e.g. trees[3].left
    """
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelParseError("$", f"not valid UTF-8 JSON: {e}") from e
    return forest_from_dict(document)


@dataclass(frozen=True)
class ModelBundle:
    """Everything explain / benchmark need besides the data."""

    forest: Forest
    meta: DatasetMeta
    scaler: ScalerState
    params: TrainingParams
    holdout_f1: Optional[float] = None
    trained_rows: int = 0


def _params_to_dict(params: TrainingParams) -> dict[str, Any]:
    return {
        "n_estimators": params.n_estimators,
        "max_depth": params.max_depth or 0,
        "max_features": params.max_features,
        "min_samples_leaf": params.min_samples_leaf,
        "bootstrap": params.bootstrap,
        "seed": params.seed,
    }


def _params_from_dict(data: dict[str, Any]) -> TrainingParams:
    return TrainingParams(
        n_estimators=int(data["n_estimators"]),
        max_depth=int(data["max_depth"]) or None,
        max_features=data["max_features"],
        min_samples_leaf=data["min_samples_leaf"],
        bootstrap=bool(data["bootstrap"]),
        seed=int(data["seed"]),
    )


def save_bundle(bundle: ModelBundle, model_dir: Path) -> None:
    """Write forest.json and bundle.toml into model_dir."""
    model_dir.mkdir(parents=True, exist_ok=True)
    (model_dir / FOREST_FILE).write_bytes(serialize_forest(bundle.forest))
    model_section: dict[str, Any] = {"format": BUNDLE_FORMAT, "trained_rows": bundle.trained_rows}
    if bundle.holdout_f1 is not None:
        model_section["holdout_f1"] = bundle.holdout_f1
    write_toml(
        model_dir / BUNDLE_FILE,
        {
            "model": model_section,
            "training": _params_to_dict(bundle.params),
            "scaler": bundle.scaler.to_dict(),
            "meta": bundle.meta.to_dict(),
        },
    )
    logger.info(f"Saved model bundle to {model_dir}")


def load_bundle(model_dir: Path) -> ModelBundle:
    """
    Load a model bundle directory.

    Raises:
        ModelError: Missing files, malformed documents, or a scaler that
            does not match the forest's columns.
    """
    forest_path = model_dir / FOREST_FILE
    bundle_path = model_dir / BUNDLE_FILE
    if not forest_path.exists() or not bundle_path.exists():
        raise ModelError(f"no model bundle at {model_dir} (need {FOREST_FILE} and {BUNDLE_FILE})")

    forest = deserialize_forest(forest_path.read_bytes())
    try:
        data = read_toml(bundle_path)
    except IOError as e:
        raise ModelError(str(e)) from e
    for section in ("model", "training", "scaler", "meta"):
        if section not in data:
            raise ModelError(f"{BUNDLE_FILE}: missing section [{section}]")
    if data["model"].get("format") != BUNDLE_FORMAT:
        raise ModelError(f"{BUNDLE_FILE}: unsupported format {data['model'].get('format')!r}")

    try:
        meta = DatasetMeta.from_dict(data["meta"])
        scaler = ScalerState.from_dict(data["scaler"])
        params = _params_from_dict(data["training"])
    except (DataError, KeyError, TypeError, ValueError) as e:
        raise ModelError(f"{BUNDLE_FILE}: {e}") from e

    if scaler.columns != tuple(m.name for m in forest.features):
        raise ModelError("scaler columns do not match the forest's features")
    if tuple(m.name for m in meta.model_columns()) != scaler.columns:
        raise ModelError("dataset metadata does not match the forest's features")

    holdout = data["model"].get("holdout_f1")
    return ModelBundle(
        forest=forest,
        meta=meta,
        scaler=scaler,
        params=params,
        holdout_f1=float(holdout) if holdout is not None else None,
        trained_rows=int(data["model"].get("trained_rows", 0)),
    )
