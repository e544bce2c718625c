"""
Dataset ingestion for the forest rule explainer.

Reads dataset metadata (TOML) and CSV files, encodes categorical columns
(one-hot or ordinal), and fits / applies the min-max scaler that maps
numeric and ordinal columns onto [-1, 1]. One-hot members stay on {0, 1}.
"""

import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from sklearn.preprocessing import MinMaxScaler

try:
    import tomllib
except ImportError:
    # Fallback for Python < 3.11
    try:
        import tomli as tomllib
    except ImportError:
        print("ERROR: tomllib (Python 3.11+) or tomli required for metadata loading")
        sys.exit(1)

from domain.errors import DataError
from domain.forest import FeatureKind, FeatureMeta, Instance
from util.logging_setup import get_logger


logger = get_logger(__name__)

SCALED_RANGE = (-1.0, 1.0)
ONEHOT_RANGE = (0.0, 1.0)


@dataclass(frozen=True)
class FeatureSpec:
    """One column of the original dataset."""

    name: str
    type: str  # "numeric" | "categorical"
    encoding: Optional[str] = None  # "onehot" | "ordinal" for categoricals
    categories: tuple[str, ...] = ()

    @property
    def is_categorical(self) -> bool:
        return self.type == "categorical"


@dataclass(frozen=True)
class DatasetMeta:
    """Column descriptions, label column and class names of a dataset."""

    features: tuple[FeatureSpec, ...]
    label_column: str
    label_values: tuple[str, str]
    label_names: tuple[str, str]
    ignore: tuple[str, ...] = ()

    def model_columns(self) -> list[FeatureMeta]:
        """Model columns after encoding, with post-scaling global bounds."""
        columns: list[FeatureMeta] = []
        for spec in self.features:
            if not spec.is_categorical:
                columns.append(FeatureMeta(spec.name, FeatureKind.NUMERIC, *SCALED_RANGE))
            elif spec.encoding == "ordinal":
                columns.append(
                    FeatureMeta(
                        spec.name, FeatureKind.ORDINAL, *SCALED_RANGE,
                        categories=spec.categories,
                    )
                )
            else:
                for category in spec.categories:
                    columns.append(
                        FeatureMeta(
                            f"{spec.name}_{category}", FeatureKind.ONEHOT, *ONEHOT_RANGE,
                            group=spec.name, category=category,
                        )
                    )
        return columns

    def to_dict(self) -> dict[str, Any]:
        features = []
        for spec in self.features:
            entry: dict[str, Any] = {"name": spec.name, "type": spec.type}
            if spec.is_categorical:
                entry["encoding"] = spec.encoding
                entry["categories"] = list(spec.categories)
            features.append(entry)
        return {
            "label": {
                "column": self.label_column,
                "values": list(self.label_values),
                "names": list(self.label_names),
            },
            "dataset": {"ignore": list(self.ignore)},
            "features": features,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DatasetMeta":
        """Validate a parsed metadata document."""
        if "label" not in data:
            raise DataError("metadata: missing required section '[label]'")
        if not data.get("features"):
            raise DataError("metadata: at least one [[features]] entry is required")
        label = data["label"]
        for key in ("column", "values", "names"):
            if key not in label:
                raise DataError(f"metadata: missing required key 'label.{key}'")
        if len(label["values"]) != 2 or len(label["names"]) != 2:
            raise DataError("metadata: label.values and label.names need exactly two entries")

        specs = []
        seen: set[str] = set()
        for position, entry in enumerate(data["features"]):
            name = str(entry.get("name", "")).strip()
            if not name:
                raise DataError(f"metadata: features[{position}] has no name")
            if name in seen:
                raise DataError(f"metadata: duplicate feature '{name}'")
            seen.add(name)
            kind = entry.get("type", "numeric")
            if kind == "numeric":
                specs.append(FeatureSpec(name, "numeric"))
                continue
            if kind != "categorical":
                raise DataError(f"metadata: feature '{name}' has unknown type '{kind}'")
            encoding = entry.get("encoding", "onehot")
            if encoding not in ("onehot", "ordinal"):
                raise DataError(f"metadata: feature '{name}' has unknown encoding '{encoding}'")
            categories = tuple(str(c) for c in entry.get("categories", ()))
            if len(categories) < 2:
                raise DataError(f"metadata: categorical feature '{name}' needs >= 2 categories")
            if len(set(categories)) != len(categories):
                raise DataError(f"metadata: categories of '{name}' must be distinct")
            specs.append(FeatureSpec(name, "categorical", encoding, categories))

        ignore = tuple(str(c) for c in data.get("dataset", {}).get("ignore", ()))
        return cls(
            features=tuple(specs),
            label_column=str(label["column"]),
            label_values=(str(label["values"][0]), str(label["values"][1])),
            label_names=(str(label["names"][0]), str(label["names"][1])),
            ignore=ignore,
        )


def load_dataset_meta(meta_path: Path) -> DatasetMeta:
    """Load dataset metadata from a TOML file."""
    if not meta_path.exists():
        raise DataError(f"metadata file not found: {meta_path}")
    try:
        with open(meta_path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise DataError(f"failed to parse {meta_path.name}: {e}") from e
    return DatasetMeta.from_dict(data)


@dataclass(frozen=True, eq=False)
class ScalerState:
    """
    Per-column min-max state fitted on training data.

    Scaled columns go through sklearn's MinMaxScaler onto [-1, 1]; exempt
    columns (one-hot members) pass through unchanged. mins / maxs are the
    fitted data_min_ / data_max_, widened to every code on ordinal columns;
    they are what the bundle persists.
    """

    columns: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    scaled: tuple[bool, ...]
    _scaler: Optional[MinMaxScaler] = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:
        mask = np.asarray(self.scaled, dtype=bool)
        if not mask.any():
            return
        bounds = np.vstack([np.asarray(self.mins)[mask], np.asarray(self.maxs)[mask]])
        scaler = MinMaxScaler(feature_range=SCALED_RANGE).fit(bounds)
        object.__setattr__(self, "_scaler", scaler)

    @classmethod
    def fit(cls, X: np.ndarray, columns: list[FeatureMeta]) -> "ScalerState":
        X = np.asarray(X, dtype=np.float64)
        scaled = tuple(meta.kind is not FeatureKind.ONEHOT for meta in columns)
        keep = [i for i, flag in enumerate(scaled) if flag]
        mins = np.full(len(columns), ONEHOT_RANGE[0])
        maxs = np.full(len(columns), ONEHOT_RANGE[1])
        if keep:
            fitted = MinMaxScaler(feature_range=SCALED_RANGE).fit(X[:, keep])
            lo, hi = fitted.data_min_.copy(), fitted.data_max_.copy()
            for pos, index in enumerate(keep):
                meta = columns[index]
                if meta.kind is FeatureKind.ORDINAL:
                    # every code stays on the axis, seen in training or not
                    lo[pos], hi[pos] = 0.0, float(len(meta.categories) - 1)
                if not lo[pos] < hi[pos]:
                    logger.warning(f"Column '{meta.name}' is constant in the training data")
            mins[keep] = lo
            maxs[keep] = hi
        return cls(
            tuple(m.name for m in columns),
            tuple(float(v) for v in mins),
            tuple(float(v) for v in maxs),
            scaled,
        )

    def _position(self, index: int) -> int:
        return sum(self.scaled[:index])

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = X.copy()
        if self._scaler is not None:
            mask = np.asarray(self.scaled, dtype=bool)
            out[:, mask] = self._scaler.transform(X[:, mask])
        return out

    def scale_value(self, index: int, value: float) -> float:
        if not self.scaled[index]:
            return value
        i = self._position(index)
        return float(value * self._scaler.scale_[i] + self._scaler.min_[i])

    def inverse_value(self, index: int, value: float) -> float:
        if not self.scaled[index]:
            return value
        i = self._position(index)
        return float((value - self._scaler.min_[i]) / self._scaler.scale_[i])

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": list(self.columns),
            "min": list(self.mins),
            "max": list(self.maxs),
            "scaled": list(self.scaled),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScalerState":
        return cls(
            tuple(data["columns"]),
            tuple(float(v) for v in data["min"]),
            tuple(float(v) for v in data["max"]),
            tuple(bool(v) for v in data["scaled"]),
        )


@dataclass(frozen=True, eq=False)
class EncodedDataset:
    """Encoded (unscaled) feature matrix plus labels."""

    X: np.ndarray
    y: np.ndarray
    columns: tuple[FeatureMeta, ...]
    dropped_rows: int = 0
    source_lines: tuple[int, ...] = field(default=())


def _encode_frame(frame: pd.DataFrame, meta: DatasetMeta, line_of) -> np.ndarray:
    """Encode the feature columns of a string DataFrame row by row."""
    blocks: list[np.ndarray] = []
    for spec in meta.features:
        raw = frame[spec.name].astype(str).str.strip()
        if not spec.is_categorical:
            numbers = pd.to_numeric(raw, errors="coerce")
            bad = numbers.isna()
            if bad.any():
                position = int(np.flatnonzero(bad.to_numpy())[0])
                raise DataError(
                    f"{line_of(position)}: column '{spec.name}' expects a number, "
                    f"got '{raw.iloc[position]}'"
                )
            blocks.append(numbers.to_numpy(dtype=np.float64).reshape(-1, 1))
            continue

        codes = raw.map({c: i for i, c in enumerate(spec.categories)})
        unknown = codes.isna()
        if unknown.any():
            position = int(np.flatnonzero(unknown.to_numpy())[0])
            raise DataError(
                f"{line_of(position)}: unknown category '{raw.iloc[position]}' for "
                f"'{spec.name}'; valid categories: {', '.join(spec.categories)}"
            )
        codes_arr = codes.to_numpy(dtype=np.int64)
        if spec.encoding == "ordinal":
            blocks.append(codes_arr.astype(np.float64).reshape(-1, 1))
        else:
            onehot = np.zeros((len(codes_arr), len(spec.categories)), dtype=np.float64)
            onehot[np.arange(len(codes_arr)), codes_arr] = 1.0
            blocks.append(onehot)
    return np.hstack(blocks) if blocks else np.empty((len(frame), 0))


def load_csv(csv_path: Path, meta: DatasetMeta) -> EncodedDataset:
    """
    Read and encode a labeled CSV file.

    Comma separated, header row required, '?' marks a missing value; rows
    with missing values are dropped and counted.

    Raises:
        DataError: Unreadable file, empty dataset, unexpected or missing
            columns, unparsable values (with line numbers).
    """
    if not csv_path.exists():
        raise DataError(f"data file not found: {csv_path}")
    try:
        frame = pd.read_csv(
            csv_path,
            dtype=str,
            skipinitialspace=True,
            keep_default_na=False,
            na_values=["?"],
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise DataError("empty dataset") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"failed to parse {csv_path.name}: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    expected = {s.name for s in meta.features} | {meta.label_column}
    unexpected = [c for c in frame.columns if c not in expected and c not in meta.ignore]
    if unexpected:
        raise DataError(f"columns not described by metadata: {', '.join(unexpected)}")
    missing = [c for c in expected if c not in frame.columns]
    if missing:
        raise DataError(f"columns missing from {csv_path.name}: {', '.join(sorted(missing))}")
    if frame.empty:
        raise DataError("empty dataset")

    used = [s.name for s in meta.features] + [meta.label_column]
    complete = frame[used].notna().all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        logger.info(f"Dropped {dropped} row(s) with missing values from {csv_path.name}")
    frame = frame.loc[complete]
    if frame.empty:
        raise DataError("empty dataset")

    # header is line 1; pandas index is the 0-based data row
    lines = tuple(int(i) + 2 for i in frame.index)

    labels = frame[meta.label_column].astype(str).str.strip()
    mapped = labels.map({meta.label_values[0]: 0, meta.label_values[1]: 1})
    if mapped.isna().any():
        position = int(np.flatnonzero(mapped.isna().to_numpy())[0])
        raise DataError(
            f"line {lines[position]}: label '{labels.iloc[position]}' is not one of "
            f"{', '.join(meta.label_values)}"
        )

    X = _encode_frame(frame.reset_index(drop=True), meta, lambda pos: f"line {lines[pos]}")
    y = mapped.to_numpy(dtype=np.int64)
    logger.info(f"Loaded {len(y)} rows x {X.shape[1]} model columns from {csv_path.name}")
    return EncodedDataset(X, y, tuple(meta.model_columns()), dropped, lines)


def parse_instance(text: str, meta: DatasetMeta) -> np.ndarray:
    """
    Parse one instance given either as a CSV row in metadata feature order
    or as a comma separated key=value list. Returns the encoded row.
    """
    text = text.strip()
    if not text:
        raise DataError("empty instance")
    if "=" in text:
        values: dict[str, str] = {}
        for part in text.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise DataError(f"instance: expected key=value, got '{part.strip()}'")
            key, value = part.split("=", 1)
            values[key.strip()] = value.strip()
        names = [s.name for s in meta.features]
        unknown = [k for k in values if k not in names]
        if unknown:
            raise DataError(f"instance: unknown feature(s) {', '.join(unknown)}")
        absent = [n for n in names if n not in values]
        if absent:
            raise DataError(f"instance: missing feature(s) {', '.join(absent)}")
        row = [values[n] for n in names]
    else:
        row = [c.strip() for c in next(csv.reader(io.StringIO(text)))]
        if len(row) != len(meta.features):
            raise DataError(
                f"instance: expected {len(meta.features)} values, got {len(row)}"
            )
    frame = pd.DataFrame([row], columns=[s.name for s in meta.features], dtype=str)
    return _encode_frame(frame, meta, lambda pos: "instance")[0]


def scale_instance(
    encoded: np.ndarray,
    scaler: ScalerState,
    columns: tuple[FeatureMeta, ...],
) -> tuple[Instance, list[str]]:
    """
    Scale an encoded row and clamp it into the global bounds.

    Returns:
        (instance, names of clamped columns)
    """
    scaled = scaler.transform(np.asarray(encoded, dtype=np.float64).reshape(1, -1))[0]
    clamped: list[str] = []
    for index, meta in enumerate(columns):
        value = scaled[index]
        if value < meta.global_min or value > meta.global_max:
            clamped.append(meta.name)
            scaled[index] = min(max(value, meta.global_min), meta.global_max)
    if clamped:
        logger.warning(f"Clamped out-of-range input for: {', '.join(clamped)}")
    return Instance.of(scaled), clamped
