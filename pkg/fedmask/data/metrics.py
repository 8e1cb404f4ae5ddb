"""
Binary classification metrics with class 1 as the positive class.
"""

import logging
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import numpy.typing as npt

from ..models.network_model import EmptyBatch, ShapeError

logger = logging.getLogger(__name__)


class DegenerateMetric(UserWarning):
    """Issued when a metric's denominator is zero and the metric is reported as 0."""


@dataclass(frozen=True)
class Metrics:
    """Precision, recall, accuracy and F1 of one prediction set."""

    precision: float
    recall: float
    accuracy: float
    f1: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(predictions: npt.ArrayLike, labels: npt.ArrayLike) -> tuple[int, int, int, int]:
    """(TP, FP, FN, TN) counts."""
    p = np.asarray(predictions, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if p.shape != y.shape:
        raise ShapeError(f"{p.size} predictions vs {y.size} labels")
    tp = int(np.sum((p == 1) & (y == 1)))
    fp = int(np.sum((p == 1) & (y == 0)))
    fn = int(np.sum((p == 0) & (y == 1)))
    tn = int(np.sum((p == 0) & (y == 0)))
    return tp, fp, fn, tn


def metrics(predictions: npt.ArrayLike, labels: npt.ArrayLike) -> Metrics:
    """
    Compute precision, recall, accuracy and F1.

    Zero denominators give 0 and set `degenerate`, with a DegenerateMetric warning.

    Raises:
        EmptyBatch: If there are no predictions
        ShapeError: If lengths differ

    Examples:
        >>> m = metrics([1, 1, 1, 1, 0, 0, 0, 0, 0, 0], [1, 1, 1, 0, 1, 1, 0, 0, 0, 0])
        >>> (m.precision, m.recall, m.accuracy)
        (0.75, 0.6, 0.7)
    """
    if np.asarray(predictions).size == 0:
        raise EmptyBatch("metrics needs at least one prediction")
    tp, fp, fn, tn = confusion(predictions, labels)
    degenerate = False
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    accuracy = (tp + tn) / (tp + fp + fn + tn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    if degenerate:
        logger.warning("Degenerate metric: TP=%d FP=%d FN=%d TN=%d", tp, fp, fn, tn)
        warnings.warn(f"zero denominator (TP={tp}, FP={fp}, FN={fn})", DegenerateMetric, stacklevel=2)
    return Metrics(precision, recall, accuracy, f1, degenerate)
