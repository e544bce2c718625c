"""
Download the UCI datasets described in fixtures/meta into data/datasets/.

The raw files have no header row; this script writes them as CSV with the
column names the metadata expects. Network access happens only here.

Usage:
    python scripts/fetch_datasets.py [banknote heart adult] [--out-dir DIR] [--force]
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from urllib.error import URLError

import pandas as pd

# Add project root to path for imports
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from util.logging_setup import get_logger, setup_logging


logger = get_logger(__name__)

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
DEFAULT_OUT_DIR = project_root / "data" / "datasets"


@dataclass(frozen=True)
class Source:
    url: str
    columns: tuple[str, ...]
    separator: str = ","


SOURCES: dict[str, Source] = {
    "banknote": Source(
        f"{UCI}/00267/data_banknote_authentication.txt",
        ("variance", "skew", "curtosis", "entropy", "class"),
    ),
    "heart": Source(
        f"{UCI}/statlog/heart/heart.dat",
        (
            "age", "sex", "chest_pain", "resting_bp", "cholesterol", "fasting_sugar",
            "resting_ecg", "max_hr", "exercise_angina", "oldpeak", "slope",
            "major_vessels", "thal", "presence",
        ),
        separator=r"\s+",
    ),
    "adult": Source(
        f"{UCI}/adult/adult.data",
        (
            "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
            "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
            "hours-per-week", "native-country", "income",
        ),
    ),
}


def fetch(name: str, out_dir: Path, force: bool = False) -> Path:
    """Download one dataset and write it as <out_dir>/<name>.csv."""
    source = SOURCES[name]
    target = out_dir / f"{name}.csv"
    if target.exists() and not force:
        logger.info(f"{target} exists, skipping")
        return target

    logger.info(f"Downloading {name} from {source.url}")
    frame = pd.read_csv(
        source.url,
        header=None,
        names=list(source.columns),
        sep=source.separator,
        skipinitialspace=True,
        dtype=str,
        engine="python" if source.separator != "," else "c",
    )
    frame = frame.dropna(how="all")
    out_dir.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False)
    logger.info(f"Wrote {len(frame)} rows to {target}")
    return target


def main() -> int:
    parser = argparse.ArgumentParser(description="Download UCI datasets as CSV.")
    parser.add_argument("names", nargs="*", help=f"datasets (default: {', '.join(SOURCES)})")
    parser.add_argument("--out-dir", type=Path, default=DEFAULT_OUT_DIR)
    parser.add_argument("--force", action="store_true", help="overwrite existing files")
    args = parser.parse_args()
    unknown = [n for n in args.names if n not in SOURCES]
    if unknown:
        parser.error(f"unknown dataset(s): {', '.join(unknown)}")

    setup_logging()
    for name in args.names or list(SOURCES):
        try:
            path = fetch(name, args.out_dir, args.force)
        except (URLError, OSError, pd.errors.ParserError) as e:
            logger.error(f"Failed to fetch {name}: {e}")
            print(f"ERROR: failed to fetch {name}: {e}", file=sys.stderr)
            return 1
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
