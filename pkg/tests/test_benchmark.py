from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.benchmark import run_benchmark
from domain.reduction import PipelineConfig
from fixtures.synthetic import load_meta
from fixtures.toy import association_forest
from services.benchmark_service import TOGGLE_ROWS, format_table, row_label, write_table_csv
from services.dataset_service import ScalerState, load_csv
from services.forest_trainer import TrainingParams, TrainingSet, train_forest


BANKNOTE_CSV = Path(__file__).parent.parent / "data" / "datasets" / "banknote.csv"


def _row(table: pd.DataFrame, label: str) -> pd.Series:
    return table.set_index("techniques").loc[label]


class TestToyBenchmark:

    def test_table(self):
        X = np.zeros((4, 4))
        result = run_benchmark(association_forest(), X, PipelineConfig(), workers=1)
        assert result.success
        assert result.instance_count == 4
        assert list(result.table["techniques"]) == [row_label(r) for r in TOGGLE_ROWS]
        assert len(result.per_instance) == 4 * len(TOGGLE_ROWS)

        ar = _row(result.table, "AR")
        assert ar["feature_reduction_mean"] == pytest.approx(0.25)
        assert ar["path_reduction_mean"] == pytest.approx(0.4)
        assert ar["path_reduction_std"] == pytest.approx(0.0)

        rs = _row(result.table, "RS")
        assert rs["path_reduction_mean"] == pytest.approx(0.4)
        assert rs["path_reduction_std"] == pytest.approx(0.0, abs=1e-12)

    def test_selected_rows_only(self):
        rows = ((True, False, False), (False, False, True))
        result = run_benchmark(association_forest(), np.zeros((2, 4)), PipelineConfig(), 1, rows)
        assert list(result.table["techniques"]) == ["AR", "RS"]
        assert list(result.table["association_rules"]) == [True, False]

    def test_format_and_csv(self, tmp_path):
        result = run_benchmark(association_forest(), np.zeros((2, 4)), PipelineConfig(), workers=1)
        text = format_table(result.table)
        assert "✓" in text
        assert "40.00 ± 0.00" in text
        write_table_csv(result.table, tmp_path / "out" / "table.csv")
        written = pd.read_csv(tmp_path / "out" / "table.csv")
        assert list(written["techniques"]) == list(result.table["techniques"])

    def test_failed_instance_is_reported(self):
        # a three-value row cannot be explained by a four-feature forest
        forest = association_forest()
        result = run_benchmark(forest, np.zeros((2, 3)), PipelineConfig(), workers=1)
        assert not result.success
        assert [o.index for o in result.failed] == [0, 1]
        assert result.failed[0].error_code == "DATA_INVALID"


@pytest.mark.slow
def test_worker_count_does_not_change_results(banknote_forest):
    forest, X = banknote_forest
    inline = run_benchmark(forest, X[:24], PipelineConfig(seed=5), workers=1)
    pooled = run_benchmark(forest, X[:24], PipelineConfig(seed=5), workers=3)
    pd.testing.assert_frame_equal(inline.table, pooled.table)


@pytest.mark.slow
@pytest.mark.network
@pytest.mark.skipif(not BANKNOTE_CSV.exists(), reason="run scripts/fetch_datasets.py first")
def test_banknote_reduction_levels():
    dataset = load_csv(BANKNOTE_CSV, load_meta("banknote"))
    scaler = ScalerState.fit(dataset.X, list(dataset.columns))
    X = scaler.transform(dataset.X)
    params = TrainingParams(
        n_estimators=500, max_depth=10, max_features=0.75, min_samples_leaf=1, seed=0
    )
    forest = train_forest(TrainingSet(X, dataset.y, dataset.columns), params)
    sample = np.random.default_rng(0).choice(X.shape[0], size=100, replace=False)
    result = run_benchmark(forest, X[np.sort(sample)], PipelineConfig(seed=0))
    assert result.success

    everything = _row(result.table, "AR+CL+RS")
    assert 0.40 <= everything["path_reduction_mean"] <= 0.50
    assert everything["feature_reduction_mean"] >= 0.20
    ar = _row(result.table, "AR")["feature_reduction_mean"]
    assert ar > _row(result.table, "CL")["feature_reduction_mean"]
    assert ar > _row(result.table, "RS")["feature_reduction_mean"]
