"""
Configuration loader for the forest rule explainer.

Loads and validates config.toml from the project root into dataclasses.
Invalid or missing configuration raises ConfigError.
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

try:
    import tomllib
except ImportError:
    # Fallback for Python < 3.11
    try:
        import tomli as tomllib
    except ImportError:
        print("ERROR: tomllib (Python 3.11+) or tomli required for config loading")
        sys.exit(1)

from domain.errors import ConfigError


@dataclass
class ForestConfig:
    """Forest training defaults"""
    n_estimators: int
    max_depth: Optional[int]
    max_features: Union[str, float]
    min_samples_leaf: Union[int, float]
    bootstrap: bool
    seed: int


@dataclass
class PipelineSettings:
    """Reduction pipeline defaults"""
    association_rules: bool
    clustering: bool
    random_selection: bool
    min_support: float
    max_itemset_size: int
    medoids: Optional[int] = None  # None: ceil(sqrt(K))
    min_path_fraction: Optional[float] = None  # None: plain quorum


@dataclass
class RuleConfig:
    """Rule rendering defaults"""
    hide_last: int
    decimals: int


@dataclass
class BenchmarkConfig:
    """Benchmark / holdout defaults"""
    workers: Optional[int]  # None: number of processors
    holdout: float


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str
    log_dir: Optional[Path]
    max_bytes: int
    backup_count: int


@dataclass
class AppConfig:
    """Complete application configuration"""
    forest: ForestConfig
    pipeline: PipelineSettings
    rule: RuleConfig
    benchmark: BenchmarkConfig
    logging: LoggingConfig


def default_config_path() -> Path:
    return Path(__file__).parent.parent / "config.toml"


def _require(section: dict[str, Any], name: str, keys: list[str]) -> None:
    for key in keys:
        if key not in section:
            raise ConfigError(f"Missing required key '{name}.{key}' in config.toml")


def _parse_max_features(raw: Any) -> Union[str, float]:
    if isinstance(raw, str):
        if raw in ("sqrt", "log2", "all"):
            return raw
        raise ConfigError(f"forest.max_features must be sqrt, log2, all or a fraction, got '{raw}'")
    value = float(raw)
    if not 0.0 < value <= 1.0:
        raise ConfigError(f"forest.max_features fraction must be in (0, 1], got {value}")
    return value


def load_config(config_path: Path | None = None) -> AppConfig:
    """
    Load and validate config.toml.

    Args:
        config_path: Path to config.toml. If None, uses project root.

    Returns:
        AppConfig with validated values.

    Raises:
        ConfigError: if config is invalid or missing.
    """
    if config_path is None:
        config_path = default_config_path()

    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    try:
        with open(config_path, "rb") as f:
            config_data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Failed to parse config.toml: {e}") from e

    # Validate required sections
    required_sections = ["forest", "pipeline", "rule", "benchmark", "logging"]
    for section in required_sections:
        if section not in config_data:
            raise ConfigError(f"Missing required section '[{section}]' in config.toml")

    forest_data = config_data["forest"]
    _require(forest_data, "forest", [
        "n_estimators", "max_depth", "max_features", "min_samples_leaf", "bootstrap", "seed",
    ])
    try:
        max_depth = int(forest_data["max_depth"])
        leaf = forest_data["min_samples_leaf"]
        forest = ForestConfig(
            n_estimators=int(forest_data["n_estimators"]),
            max_depth=max_depth if max_depth > 0 else None,
            max_features=_parse_max_features(forest_data["max_features"]),
            min_samples_leaf=float(leaf) if isinstance(leaf, float) else int(leaf),
            bootstrap=bool(forest_data["bootstrap"]),
            seed=int(forest_data["seed"]),
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid forest configuration: {e}") from e
    if forest.n_estimators < 1:
        raise ConfigError("forest.n_estimators must be >= 1")

    pipeline_data = config_data["pipeline"]
    _require(pipeline_data, "pipeline", [
        "association_rules", "clustering", "random_selection", "min_support", "max_itemset_size",
    ])
    try:
        medoids = int(pipeline_data.get("medoids", 0))
        fraction = float(pipeline_data.get("min_path_fraction", 0.0))
        if medoids < 0 or fraction < 0:
            raise ValueError("medoids and min_path_fraction must be >= 0")
        pipeline = PipelineSettings(
            association_rules=bool(pipeline_data["association_rules"]),
            clustering=bool(pipeline_data["clustering"]),
            random_selection=bool(pipeline_data["random_selection"]),
            min_support=float(pipeline_data["min_support"]),
            max_itemset_size=int(pipeline_data["max_itemset_size"]),
            medoids=medoids if medoids > 0 else None,
            min_path_fraction=fraction if fraction > 0 else None,
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid pipeline configuration: {e}") from e
    if not 0.0 <= pipeline.min_support <= 1.0:
        raise ConfigError("pipeline.min_support must be in [0, 1]")
    if pipeline.max_itemset_size < 2:
        raise ConfigError("pipeline.max_itemset_size must be >= 2")
    if pipeline.min_path_fraction is not None and pipeline.min_path_fraction > 1.0:
        raise ConfigError("pipeline.min_path_fraction must be <= 1")

    rule_data = config_data["rule"]
    _require(rule_data, "rule", ["hide_last", "decimals"])
    try:
        rule = RuleConfig(hide_last=int(rule_data["hide_last"]), decimals=int(rule_data["decimals"]))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid rule configuration: {e}") from e
    if rule.hide_last < 0:
        raise ConfigError("rule.hide_last must be >= 0")
    if rule.decimals < 0:
        raise ConfigError("rule.decimals must be >= 0")

    benchmark_data = config_data["benchmark"]
    _require(benchmark_data, "benchmark", ["workers", "holdout"])
    try:
        workers = int(benchmark_data["workers"])
        benchmark = BenchmarkConfig(
            workers=workers if workers > 0 else None,
            holdout=float(benchmark_data["holdout"]),
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid benchmark configuration: {e}") from e
    if not 0.0 < benchmark.holdout < 1.0:
        raise ConfigError("benchmark.holdout must be in (0, 1)")

    logging_data = config_data["logging"]
    _require(logging_data, "logging", ["level"])
    raw_dir = str(logging_data.get("log_dir", "")).strip()
    log_dir = None
    if raw_dir:
        log_dir = Path(raw_dir)
        if not log_dir.is_absolute():
            log_dir = config_path.parent / log_dir
    try:
        logging_config = LoggingConfig(
            level=str(logging_data["level"]),
            log_dir=log_dir,
            max_bytes=int(logging_data.get("max_bytes", 10 * 1024 * 1024)),
            backup_count=int(logging_data.get("backup_count", 5)),
        )
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid logging configuration: {e}") from e

    return AppConfig(
        forest=forest,
        pipeline=pipeline,
        rule=rule,
        benchmark=benchmark,
        logging=logging_config,
    )
