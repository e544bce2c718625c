"""
Seeded synthetic datasets shaped like the metadata in fixtures/meta.

banknote_like: four numeric wavelet-style features, label from a noisy
linear boundary. adult_like: every Adult column (numeric, ordinal and
one-hot), label from education, hours, marital status and capital gain,
with optional '?' cells.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from services.dataset_service import DatasetMeta, load_dataset_meta


META_DIR = Path(__file__).parent / "meta"


def meta_path(name: str) -> Path:
    return META_DIR / f"{name}.toml"


def load_meta(name: str) -> DatasetMeta:
    return load_dataset_meta(meta_path(name))


def _labels(meta: DatasetMeta, classes: np.ndarray) -> list[str]:
    return [meta.label_values[int(c)] for c in classes]


def banknote_like(n_rows: int = 200, seed: int = 0) -> pd.DataFrame:
    meta = load_meta("banknote")
    rng = np.random.default_rng(seed)
    variance = rng.normal(0.5, 2.8, n_rows)
    skew = rng.normal(1.9, 5.8, n_rows)
    curtosis = rng.gamma(2.0, 2.0, n_rows) - 2.0
    entropy = -rng.gamma(1.5, 1.3, n_rows) + 1.0
    score = -1.2 * variance - 0.4 * skew - 0.3 * curtosis + rng.normal(0.0, 0.8, n_rows)
    classes = (score > 0).astype(int)
    frame = pd.DataFrame(
        {
            "variance": variance.round(5),
            "skew": skew.round(5),
            "curtosis": curtosis.round(5),
            "entropy": entropy.round(5),
        }
    )
    frame[meta.label_column] = _labels(meta, classes)
    return frame


def _choice(
    rng: np.random.Generator, categories: tuple[str, ...], n: int, head: float
) -> np.ndarray:
    """First category drawn with probability `head`, the rest uniformly."""
    weights = np.full(len(categories), (1.0 - head) / (len(categories) - 1))
    weights[0] = head
    return rng.choice(np.array(categories, dtype=object), size=n, p=weights)


def adult_like(n_rows: int = 300, seed: int = 0, missing_fraction: float = 0.0) -> pd.DataFrame:
    meta = load_meta("adult")
    specs = {s.name: s for s in meta.features}
    rng = np.random.default_rng(seed)

    age = rng.integers(17, 80, n_rows)
    education_codes = rng.integers(0, len(specs["education"].categories), n_rows)
    hours = rng.integers(10, 80, n_rows)
    capital_gain = np.where(rng.random(n_rows) < 0.1, rng.integers(1000, 20000, n_rows), 0)
    capital_loss = np.where(rng.random(n_rows) < 0.05, rng.integers(100, 3000, n_rows), 0)
    marital = _choice(rng, specs["marital-status"].categories, n_rows, 0.45)
    country = _choice(rng, specs["native-country"].categories, n_rows, 0.7)

    score = (
        0.35 * education_codes
        + 0.04 * hours
        + 1.5 * (marital == "Married-civ-spouse")
        + 2.5 * (capital_gain > 5000)
        + 0.02 * age
        + rng.normal(0.0, 1.0, n_rows)
    )
    classes = (score > np.median(score)).astype(int)

    frame = pd.DataFrame(
        {
            "age": age,
            "workclass": _choice(rng, specs["workclass"].categories, n_rows, 0.7),
            "fnlwgt": rng.integers(20000, 500000, n_rows),
            "education": np.array(specs["education"].categories, dtype=object)[education_codes],
            "education-num": education_codes + 1,
            "marital-status": marital,
            "occupation": _choice(rng, specs["occupation"].categories, n_rows, 0.15),
            "relationship": _choice(rng, specs["relationship"].categories, n_rows, 0.2),
            "race": _choice(rng, specs["race"].categories, n_rows, 0.8),
            "sex": _choice(rng, specs["sex"].categories, n_rows, 0.4),
            "capital-gain": capital_gain,
            "capital-loss": capital_loss,
            "hours-per-week": hours,
            "native-country": country,
        }
    )
    frame = frame.astype(str)
    if missing_fraction > 0:
        holes = rng.random(frame.shape) < missing_fraction
        frame = frame.mask(holes, "?")
    frame[meta.label_column] = _labels(meta, classes)
    return frame


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path

