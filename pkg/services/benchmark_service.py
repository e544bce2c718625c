"""
Reduction benchmark tables.

Toggle rows, per-instance seeds and the aggregation of feature and path
reduction ratios into mean and standard deviation per technique row.
"""

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from util.logging_setup import get_logger


logger = get_logger(__name__)

# (association rules, clustering, random selection), in report order
TOGGLE_ROWS: tuple[tuple[bool, bool, bool], ...] = (
    (True, True, True),
    (False, True, True),
    (True, False, True),
    (True, True, False),
    (True, False, False),
    (False, True, False),
    (False, False, True),
)

_ABBREVIATIONS = ("AR", "CL", "RS")


def row_label(row: tuple[bool, bool, bool]) -> str:
    """AR+CL+RS style label of a toggle row."""
    return "+".join(name for name, on in zip(_ABBREVIATIONS, row) if on) or "none"


def instance_seed(master_seed: int, index: int) -> int:
    """Seed of one instance, independent of worker assignment."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def aggregate(
    per_instance: pd.DataFrame, rows: Sequence[tuple[bool, bool, bool]] = TOGGLE_ROWS
) -> pd.DataFrame:
    """Mean and population std of both ratios per toggle row, in row order."""
    labels = [row_label(row) for row in rows]

    def population_std(s: pd.Series) -> float:
        return float(s.std(ddof=0))

    ratios = per_instance.astype({"feature_reduction": float, "path_reduction": float})
    table = ratios.groupby("techniques", sort=False).agg(
        feature_reduction_mean=("feature_reduction", "mean"),
        feature_reduction_std=("feature_reduction", population_std),
        path_reduction_mean=("path_reduction", "mean"),
        path_reduction_std=("path_reduction", population_std),
    )
    table = table.reindex(pd.Index(labels, name="techniques")).reset_index()
    flags = pd.DataFrame(rows, columns=["association_rules", "clustering", "random_selection"])
    return pd.concat([flags, table], axis=1)


def format_table(table: pd.DataFrame) -> str:
    """Aligned text table with ratios in percent."""

    def cell(mean: float, std: float) -> str:
        if pd.isna(mean):
            return "-"
        return f"{100 * mean:6.2f} ± {100 * std:.2f}"

    view = pd.DataFrame(
        {
            "AR": table["association_rules"].map({True: "✓", False: "-"}),
            "CL": table["clustering"].map({True: "✓", False: "-"}),
            "RS": table["random_selection"].map({True: "✓", False: "-"}),
            "feature reduction %": [
                cell(m, s)
                for m, s in zip(table["feature_reduction_mean"], table["feature_reduction_std"])
            ],
            "path reduction %": [
                cell(m, s)
                for m, s in zip(table["path_reduction_mean"], table["path_reduction_std"])
            ],
        }
    )
    return view.to_string(index=False)


def write_table_csv(table: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False)
    logger.info(f"Wrote benchmark table to {path}")
