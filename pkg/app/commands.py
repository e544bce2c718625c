"""
Command implementations for the CLI (train / explain / benchmark).

Each command returns an exit code and writes its results to `out`.
Domain errors propagate to app.main, which maps them to exit codes.
"""

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

import numpy as np
from sklearn.metrics import f1_score
from sklearn.model_selection import train_test_split

from app.benchmark import run_benchmark
from app.pipeline import ReductionResult, reduce
from domain.errors import ConfigError, DataError
from domain.forest import Instance
from domain.paths import Path as DecisionPath
from domain.reduction import PipelineConfig
from domain.rules import Rule
from services.benchmark_service import TOGGLE_ROWS, format_table, row_label, write_table_csv
from services.dataset_service import (
    ScalerState,
    load_csv,
    load_dataset_meta,
    parse_instance,
    scale_instance,
)
from services.forest_service import predict_batch
from services.forest_trainer import TrainingParams, TrainingSet, train_forest
from services.interpretation_service import (
    compose_rule,
    render_alternatives,
    render_rule,
    rule_to_dict,
)
from services.model_store import ModelBundle, load_bundle, save_bundle
from services.path_service import features_of, intersect_ranges
from util.config_loader import AppConfig, ForestConfig, PipelineSettings
from util.logging_setup import get_logger


logger = get_logger(__name__)

SEED_ENV = "LF_SEED"


def resolve_seed(flag: Optional[int], config_seed: int) -> int:
    """--seed flag, then the LF_SEED environment variable, then config."""
    if flag is not None:
        return flag
    raw = os.environ.get(SEED_ENV, "").strip()
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got '{raw}'") from None
    return config_seed


@dataclass(frozen=True)
class PipelineOverrides:
    """Command-line overrides of the [pipeline] section; None keeps config."""

    no_association_rules: bool = False
    no_clustering: bool = False
    no_random: bool = False
    min_support: Optional[float] = None
    medoids: Optional[int] = None
    min_path_fraction: Optional[float] = None


def _override(flag: Optional[float], configured: Optional[float]) -> Optional[float]:
    """0 on the command line means the default, as in config.toml."""
    if flag is None:
        return configured
    return None if flag == 0 else flag


def build_pipeline_config(
    settings: PipelineSettings, overrides: PipelineOverrides, seed: int
) -> PipelineConfig:
    try:
        return PipelineConfig(
            use_association_rules=settings.association_rules and not overrides.no_association_rules,
            use_clustering=settings.clustering and not overrides.no_clustering,
            use_random=settings.random_selection and not overrides.no_random,
            min_support=(
                overrides.min_support if overrides.min_support is not None else settings.min_support
            ),
            max_itemset_size=settings.max_itemset_size,
            n_medoids_override=_override(overrides.medoids, settings.medoids),
            min_path_fraction=_override(overrides.min_path_fraction, settings.min_path_fraction),
            seed=seed,
        )
    except ValueError as e:
        raise ConfigError(f"Invalid pipeline parameters: {e}") from e


def training_params(forest: ForestConfig, seed: int) -> TrainingParams:
    try:
        return TrainingParams(
            n_estimators=forest.n_estimators,
            max_depth=forest.max_depth,
            max_features=forest.max_features,
            min_samples_leaf=forest.min_samples_leaf,
            bootstrap=forest.bootstrap,
            seed=seed,
        )
    except ValueError as e:
        raise ConfigError(f"Invalid forest parameters: {e}") from e


def _split_indices(y: np.ndarray, holdout: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    indices = np.arange(y.shape[0])
    try:
        return train_test_split(indices, test_size=holdout, random_state=seed, stratify=y)
    except ValueError:
        # too few rows of one class to stratify
        logger.warning("Stratified split impossible, using a plain random split")
        return train_test_split(indices, test_size=holdout, random_state=seed)


def cmd_train(
    config: AppConfig,
    data_path: Path,
    meta_path: Path,
    model_dir: Path,
    seed: int,
    full: bool = False,
    out: TextIO = sys.stdout,
) -> int:
    """
    Encode, scale and train; write the model bundle.

    Without --full the forest is trained on the training split and the
    holdout F1 is reported; with --full it sees every row.
    """
    meta = load_dataset_meta(meta_path)
    dataset = load_csv(data_path, meta)
    params = training_params(config.forest, seed)

    if full:
        train_rows = np.arange(dataset.y.shape[0])
        test_rows = np.empty(0, dtype=np.int64)
    else:
        train_rows, test_rows = _split_indices(dataset.y, config.benchmark.holdout, seed)
        train_rows, test_rows = np.sort(train_rows), np.sort(test_rows)

    columns = list(dataset.columns)
    scaler = ScalerState.fit(dataset.X[train_rows], columns)
    X = scaler.transform(dataset.X)
    forest = train_forest(TrainingSet(X[train_rows], dataset.y[train_rows], columns), params)

    holdout_f1 = None
    if test_rows.size:
        predicted = predict_batch(forest, X[test_rows])
        holdout_f1 = float(f1_score(dataset.y[test_rows], predicted, zero_division=0))
        logger.info(f"Holdout F1 on {test_rows.size} rows: {holdout_f1:.4f}")

    save_bundle(
        ModelBundle(
            forest=forest,
            meta=meta,
            scaler=scaler,
            params=params,
            holdout_f1=holdout_f1,
            trained_rows=int(train_rows.size),
        ),
        model_dir,
    )
    print(
        f"Model written to {model_dir} ({params.n_estimators} trees, {train_rows.size} rows)",
        file=out,
    )
    if holdout_f1 is not None:
        print(f"Holdout F1: {holdout_f1:.4f} ({test_rows.size} rows)", file=out)
    if dataset.dropped_rows:
        print(f"Dropped {dataset.dropped_rows} rows with missing values", file=out)
    return 0


def _rule_for(
    paths: Sequence[DecisionPath],
    bundle: ModelBundle,
    instance: Instance,
    label: str,
    hide_last: int,
) -> Rule:
    forest = bundle.forest
    ranges = intersect_ranges(paths, forest.features)
    return compose_rule(
        ranges, forest, features_of(paths), bundle.scaler, label, hide_last, instance
    )


def _explain_document(
    rule: Rule,
    result: ReductionResult,
    clamped: list[str],
    original: Optional[Rule],
) -> dict[str, Any]:
    document = rule_to_dict(rule)
    document["clamped"] = clamped
    document["votes"] = {
        "class": result.prediction.predicted_class,
        "for": result.prediction.votes_for_class,
        "total": result.prediction.n_estimators,
    }
    document["report"] = result.report.to_dict()
    if original is not None:
        document["original"] = rule_to_dict(original)
    return document


def cmd_explain(
    config: AppConfig,
    model_dir: Path,
    instance_text: str,
    pipeline: PipelineConfig,
    hide_last: Optional[int] = None,
    as_json: bool = False,
    compare: bool = False,
    out: TextIO = sys.stdout,
) -> int:
    """Reduce, compose and print the rule for one instance."""
    bundle = load_bundle(model_dir)
    forest = bundle.forest
    encoded = parse_instance(instance_text, bundle.meta)
    instance, clamped = scale_instance(encoded, bundle.scaler, forest.features)

    result = reduce(forest, instance, pipeline)
    label = bundle.meta.label_names[result.prediction.predicted_class]
    hide = hide_last if hide_last is not None else config.rule.hide_last
    rule = _rule_for(result.paths, bundle, instance, label, hide)
    original = _rule_for(result.full_paths, bundle, instance, label, hide) if compare else None

    document = _explain_document(rule, result, clamped, original)
    text = json.dumps(document, ensure_ascii=False, indent=2)
    if as_json:
        print(text, file=out)
        return 0

    decimals = config.rule.decimals
    if original is not None:
        print(f"original: {render_rule(original, decimals)}", file=out)
        print(f"reduced:  {render_rule(rule, decimals)}", file=out)
    else:
        print(render_rule(rule, decimals), file=out)
    for line in render_alternatives(rule):
        print(f"  {line}", file=out)
    report = result.report
    print(
        f"  paths {report.reduced_path_count}/{report.original_path_count}, "
        f"features {report.reduced_feature_count}/{report.original_feature_count}",
        file=out,
    )
    print(text, file=out)
    return 0


def parse_rows(spec: Optional[str]) -> tuple[tuple[bool, bool, bool], ...]:
    """'AR,CL+RS' -> toggle rows; None or 'all' -> every row."""
    if spec is None or spec.strip().lower() == "all":
        return TOGGLE_ROWS
    by_label = {row_label(row): row for row in TOGGLE_ROWS}
    rows = []
    for part in spec.split(","):
        label = part.strip().upper()
        if label not in by_label:
            raise ConfigError(f"unknown technique row '{part.strip()}' (valid: {', '.join(by_label)})")
        rows.append(by_label[label])
    return tuple(rows)


def _benchmark_matrix(bundle: ModelBundle, data_path: Path) -> np.ndarray:
    dataset = load_csv(data_path, bundle.meta)
    if dataset.X.shape[0] == 0:
        raise DataError("empty dataset")
    X = bundle.scaler.transform(dataset.X)
    lows = np.array([m.global_min for m in bundle.forest.features])
    highs = np.array([m.global_max for m in bundle.forest.features])
    return np.clip(X, lows, highs)


def cmd_benchmark(
    config: AppConfig,
    model_dir: Path,
    data_path: Path,
    pipeline: PipelineConfig,
    rows: Sequence[tuple[bool, bool, bool]] = TOGGLE_ROWS,
    workers: Optional[int] = None,
    as_json: bool = False,
    out_csv: Optional[Path] = None,
    out: TextIO = sys.stdout,
) -> int:
    """Mean +- std of both reduction ratios per technique combination."""
    bundle = load_bundle(model_dir)
    X = _benchmark_matrix(bundle, data_path)
    result = run_benchmark(
        bundle.forest,
        X,
        pipeline,
        workers=workers if workers is not None else config.benchmark.workers,
        rows=rows,
    )
    if out_csv is not None:
        write_table_csv(result.table, out_csv)

    if as_json:
        print(json.dumps(json.loads(result.table.to_json(orient="records")), indent=2), file=out)
    else:
        print(format_table(result.table), file=out)
        print(f"{result.instance_count} instances, {len(result.failed)} failed", file=out)
    # failed instances are path or reduction errors: exit as a model error
    return 0 if result.success else 4
