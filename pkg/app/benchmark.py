"""
Benchmark runner.

Runs the reduction pipeline on every instance of a dataset for each
technique combination. Instances are spread over a process pool. Every
instance gets its own seed derived from (master seed, instance index), so
results do not depend on scheduling or on the number of workers.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from app.pipeline import reduce
from domain.errors import ExplainerError
from domain.forest import Forest, Instance
from domain.reduction import PipelineConfig
from services.benchmark_service import TOGGLE_ROWS, aggregate, instance_seed, row_label
from util.logging_setup import get_logger


logger = get_logger(__name__)

_PROGRESS_EVERY = 50


class InstanceOutcome:
    """Reduction ratios of one instance for every toggle row."""

    def __init__(
        self,
        index: int,
        success: bool,
        ratios: Optional[list[tuple[float, float]]] = None,
        error_code: Optional[str] = None,
        error_hint: Optional[str] = None,
    ) -> None:
        self.index = index
        self.success = success
        self.ratios = ratios or []
        self.error_code = error_code
        self.error_hint = error_hint


class BenchmarkResult:
    """Aggregated benchmark table plus the per-instance frame it came from."""

    def __init__(
        self,
        table: pd.DataFrame,
        per_instance: pd.DataFrame,
        instance_count: int,
        failed: Optional[list[InstanceOutcome]] = None,
    ) -> None:
        self.table = table
        self.per_instance = per_instance
        self.instance_count = instance_count
        self.failed = failed or []

    @property
    def success(self) -> bool:
        return not self.failed


# Per-process forest, installed once by the pool initializer.
_worker_forest: Optional[Forest] = None


def _init_worker(forest: Forest) -> None:
    global _worker_forest
    _worker_forest = forest


def _run_instance(
    task: tuple[int, tuple[float, ...], PipelineConfig, tuple[tuple[bool, bool, bool], ...]],
) -> InstanceOutcome:
    index, values, base_config, rows = task
    forest = _worker_forest
    instance = Instance(values)
    ratios = []
    try:
        for use_ar, use_cl, use_rs in rows:
            config = replace(
                base_config,
                use_association_rules=use_ar,
                use_clustering=use_cl,
                use_random=use_rs,
            )
            report = reduce(forest, instance, config).report
            ratios.append((report.feature_reduction, report.path_reduction))
    except ExplainerError as e:
        return InstanceOutcome(index, False, error_code=e.error_code, error_hint=e.error_hint)
    return InstanceOutcome(index, True, ratios)


def run_benchmark(
    forest: Forest,
    X: np.ndarray,
    base_config: PipelineConfig,
    workers: Optional[int] = None,
    rows: Sequence[tuple[bool, bool, bool]] = TOGGLE_ROWS,
) -> BenchmarkResult:
    """
    Benchmark every toggle row on every row of X (scaled instances).

    Args:
        forest: Model to explain
        X: Scaled instances, one per row
        base_config: Pipeline parameters; toggles and seed are overridden
        workers: Process count (None: number of processors, 1: inline)
        rows: Toggle rows to evaluate
    """
    X = np.asarray(X, dtype=np.float64)
    rows = tuple(rows)
    tasks = [
        (
            index,
            tuple(float(v) for v in X[index]),
            replace(base_config, seed=instance_seed(base_config.seed, index)),
            rows,
        )
        for index in range(X.shape[0])
    ]
    workers = workers or os.cpu_count() or 1
    logger.info(
        f"Benchmark: {len(tasks)} instances x {len(rows)} rows on {workers} worker(s)"
    )

    outcomes: list[InstanceOutcome] = []
    if workers == 1:
        _init_worker(forest)
        for task in tasks:
            outcomes.append(_run_instance(task))
            _log_progress(len(outcomes), len(tasks))
    else:
        chunksize = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(forest,)
        ) as pool:
            for outcome in pool.map(_run_instance, tasks, chunksize=chunksize):
                outcomes.append(outcome)
                _log_progress(len(outcomes), len(tasks))

    failed = [o for o in outcomes if not o.success]
    for outcome in failed:
        logger.error(
            f"Instance {outcome.index} failed: {outcome.error_code}: {outcome.error_hint}"
        )

    records = [
        {
            "techniques": row_label(row),
            "instance": outcome.index,
            "feature_reduction": feature_ratio,
            "path_reduction": path_ratio,
        }
        for outcome in outcomes
        if outcome.success
        for row, (feature_ratio, path_ratio) in zip(rows, outcome.ratios)
    ]
    per_instance = pd.DataFrame.from_records(
        records, columns=["techniques", "instance", "feature_reduction", "path_reduction"]
    )
    return BenchmarkResult(aggregate(per_instance, rows), per_instance, len(tasks), failed)


def _log_progress(done: int, total: int) -> None:
    if done % _PROGRESS_EVERY == 0 or done == total:
        logger.info(f"Benchmark progress: {done}/{total} instances")


