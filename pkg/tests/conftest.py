"""
Shared pytest fixtures.

Everything here is offline: datasets come from fixtures/synthetic.py and
log files go to tmp_path.
"""

from pathlib import Path

import numpy as np
import pytest

from domain.forest import Forest
from fixtures.synthetic import adult_like, banknote_like, load_meta, write_csv
from services.dataset_service import ScalerState, load_csv
from services.forest_trainer import TrainingParams, TrainingSet, train_forest


CONFIG_TEMPLATE = """\
[forest]
n_estimators = {n_estimators}
max_depth = 6
max_features = "sqrt"
min_samples_leaf = 1
bootstrap = true
seed = 0

[pipeline]
association_rules = true
clustering = true
random_selection = true
min_support = 0.1
max_itemset_size = 3
medoids = 0
min_path_fraction = 0.0

[rule]
hide_last = 0
decimals = 2

[benchmark]
workers = 1
holdout = 0.2

[logging]
level = "DEBUG"
log_dir = "{log_dir}"
"""


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv("LF_SEED", raising=False)


@pytest.fixture
def config_file(tmp_path) -> Path:
    """config.toml with a small forest, one worker and logs under tmp_path."""
    path = tmp_path / "config.toml"
    path.write_text(
        CONFIG_TEMPLATE.format(n_estimators=15, log_dir=(tmp_path / "logs").as_posix()),
        encoding="utf-8",
    )
    return path


@pytest.fixture
def banknote_csv(tmp_path) -> Path:
    return write_csv(banknote_like(n_rows=160, seed=1), tmp_path / "banknote.csv")


@pytest.fixture(scope="session")
def banknote_forest(tmp_path_factory) -> tuple[Forest, np.ndarray]:
    """Small forest trained on scaled synthetic banknote rows, plus those rows."""
    path = write_csv(banknote_like(n_rows=160, seed=3), tmp_path_factory.mktemp("data") / "b.csv")
    dataset = load_csv(path, load_meta("banknote"))
    scaler = ScalerState.fit(dataset.X, list(dataset.columns))
    X = scaler.transform(dataset.X)
    params = TrainingParams(n_estimators=21, max_depth=5, seed=7)
    forest = train_forest(TrainingSet(X, dataset.y, dataset.columns), params)
    return forest, X


@pytest.fixture(scope="session")
def adult_forest(tmp_path_factory) -> tuple[Forest, np.ndarray, ScalerState]:
    """Forest on synthetic adult rows: numeric, ordinal and one-hot columns."""
    path = write_csv(adult_like(n_rows=400, seed=5), tmp_path_factory.mktemp("data") / "a.csv")
    dataset = load_csv(path, load_meta("adult"))
    scaler = ScalerState.fit(dataset.X, list(dataset.columns))
    X = scaler.transform(dataset.X)
    params = TrainingParams(n_estimators=25, max_depth=6, seed=2)
    forest = train_forest(TrainingSet(X, dataset.y, dataset.columns), params)
    return forest, X, scaler
