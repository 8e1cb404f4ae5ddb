"""
Dataset CSV import/export: one row per sample, features then the label.
"""

import csv
from pathlib import Path
from typing import Union

import numpy as np

from ..generators.signal_gen import Dataset


def write_dataset_csv(dataset: Dataset, path: Union[str, Path]):
    """Write features with a trailing label column, header f0..f{d-1},label."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.dim)] + ["label"])
        for row, label in zip(dataset.windows, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset_csv(path: Union[str, Path]) -> Dataset:
    """Read a CSV written by write_dataset_csv (header optional)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][-1] == "label":
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path} contains no samples")
    table = np.asarray(rows, dtype=np.float64)
    return Dataset(table[:, :-1], table[:, -1].astype(np.int64))
