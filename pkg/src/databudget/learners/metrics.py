"""Classification and regression scores used throughout the toolkit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricVector:
    accuracy: float
    f1_macro: float
    recall_macro: float
    precision_macro: float

    def as_array(self) -> np.ndarray:
        return np.array([self.accuracy, self.f1_macro, self.recall_macro, self.precision_macro])

    @classmethod
    def from_array(cls, values) -> "MetricVector":
        a, f, r, p = (float(v) for v in values)
        return cls(accuracy=a, f1_macro=f, recall_macro=r, precision_macro=p)

    def dominates(self, other: "MetricVector", factor: float = 1.0) -> bool:
        """True if every component is strictly larger than ``factor * other``."""
        return bool(np.all(self.as_array() > factor * other.as_array()))


def _check_pair(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred have different lengths")
    if y_true.size == 0:
        raise ValueError("empty input")
    return y_true, y_pred


def metric_vector_array(y_true, y_pred) -> np.ndarray:
    """Accuracy, macro F1, macro recall and macro precision as an array.

    Macro averages run over the union of classes seen in either vector; a
    zero denominator contributes 0.
    """
    y_true, y_pred = _check_pair(y_true, y_pred)
    y_true = y_true.astype(np.int64)
    y_pred = y_pred.astype(np.int64)
    C = int(max(y_true.max(), y_pred.max())) + 1
    tp = np.bincount(y_true[y_true == y_pred], minlength=C).astype(np.float64)
    n_true = np.bincount(y_true, minlength=C).astype(np.float64)
    n_pred = np.bincount(y_pred, minlength=C).astype(np.float64)
    present = (n_true > 0) | (n_pred > 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(n_pred > 0, tp / n_pred, 0.0)
        recall = np.where(n_true > 0, tp / n_true, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)

    k = present.sum()
    return np.array([
        tp.sum() / y_true.size,
        f1[present].sum() / k,
        recall[present].sum() / k,
        precision[present].sum() / k,
    ])


def metric_vector(y_true, y_pred) -> MetricVector:
    return MetricVector.from_array(metric_vector_array(y_true, y_pred))


def f1_macro(y_true, y_pred) -> float:
    return float(metric_vector_array(y_true, y_pred)[1])


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination.

    With zero target variance the score is 1.0 for a perfect fit and
    ``-inf`` otherwise (see :func:`r2_defined`).
    """
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred have different lengths")
    if y_true.size < 2:
        raise ValueError("r2_score needs at least 2 points")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else float("-inf")
    return 1.0 - ss_res / ss_tot


def r2_defined(value: float) -> bool:
    return bool(np.isfinite(value))
