"""
Fixed-column CSV tables for metrics and plot data.
Rows are collected in memory and written with pandas in the declared
column order, shortest round-trip floats and "\\n" line endings.
"""

import sys
from typing import Any, Dict, List, Mapping, Sequence

import pandas as pd

from lcae.utils.errors import ShapeError

TRAIN_LOG_COLUMNS = ("sweep", "objective", "data", "label", "z1", "z2", "z", "rel_change", "forward_nmse")
NMSE_COLUMNS = ("window", "record_id", "nmse")
CLASS_METRIC_COLUMNS = ("class", "sensitivity", "specificity", "support", "accuracy")
PREDICTION_COLUMNS = ("record_id", "n_windows", "predicted", "true_label")
TIMING_COLUMNS = ("method_a", "method_b", "n_windows", "repeats", "ms_a", "ms_b", "ratio")
SWEEP_COLUMNS = ("ratio", "m", "nmse_mean", "nmse_std")


class MetricsTable:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self._rows: List[Dict[str, Any]] = []

    def __len__(self):
        return len(self._rows)

    def append(self, row: Mapping[str, Any]) -> None:
        unknown = set(row) - set(self.columns)
        missing = set(self.columns) - set(row)
        if unknown or missing:
            raise ShapeError(
                f"row does not match table columns (unknown: {sorted(unknown)}, missing: {sorted(missing)})"
            )
        self._rows.append(dict(row))

    def extend(self, rows) -> None:
        for row in rows:
            self.append(row)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows, columns=self.columns)

    def to_csv(self, path=None) -> None:
        """Write to path, or to stdout when path is None or '-'."""
        target = sys.stdout if path in (None, "-") else path
        self.to_frame().to_csv(target, index=False, lineterminator="\n")
