"""SVG figures for curves and benchmark diagnostics.

Files are byte-stable for a given matplotlib version: the SVG hash salt is
fixed, text is kept as text and the date stamp is dropped.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .budgeter import OnePointResult  # noqa: E402
from .curves import LearningCurve, SplitComparison  # noqa: E402

GENERATOR = f"matplotlib {matplotlib.__version__}"

_RC = {
    "svg.hashsalt": "databudget",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": GENERATOR})
    plt.close(fig)
    return path


def plot_curves(curves: Mapping[str, LearningCurve], path, title: str = "") -> Path:
    """Overlay one or more learning curves, each with a ±1 stddev band."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, curve in curves.items():
            x = np.asarray(curve.grid, dtype=float)
            (line,) = ax.plot(x, curve.s, label=label, lw=1.2)
            ax.fill_between(x, curve.s - curve.per_x_stddev, curve.s + curve.per_x_stddev,
                            color=line.get_color(), alpha=0.15, lw=0)
        ax.set_xlabel("train size x")
        ax.set_ylabel("F1 macro")
        ax.set_title(title)
        if len(curves) > 1:
            ax.legend(loc="lower right")
        return _save(fig, path)


def plot_one_point(results: Sequence[OnePointResult], path) -> Path:
    """R² of predicting the final score from a single curve point, against x."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        xs = [r.x for r in results]
        ax.plot(xs, [r.r2 for r in results], marker="o", ms=3, label="in-sample")
        cv = [r.cv_r2 for r in results]
        if any(v is not None for v in cv):
            ax.plot(xs, [np.nan if v is None else v for v in cv], marker="s", ms=3,
                    label="cross-validated")
            ax.legend(loc="lower right")
        ax.set_xlabel("curve position x")
        ax.set_ylabel("R² (final performance)")
        return _save(fig, path)


def plot_coefficients(positions: Sequence[int], weights: np.ndarray, path) -> Path:
    """Logistic coefficients per feature, one line per needed-amount bin."""
    weights = np.asarray(weights)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        idx = np.arange(weights.shape[1])
        for b, row in enumerate(weights):
            ax.plot(idx, row, marker=".", label=f"bin {b}")
        labels = [str(p) for p in positions] + ["m"] * (weights.shape[1] - len(positions))
        step = max(1, len(labels) // 12)
        ax.set_xticks(idx[::step], labels[::step])
        ax.axhline(0.0, color="black", lw=0.6)
        ax.set_xlabel("feature (curve position)")
        ax.set_ylabel("coefficient")
        ax.legend(loc="best", ncol=2)
        return _save(fig, path)


def plot_balance(minority_ratio, abs_error, path, slope: float | None = None,
                 intercept: float | None = None) -> Path:
    """Per-dataset absolute error against the pilot's minority-label ratio."""
    ratio = np.asarray(minority_ratio, dtype=float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.scatter(ratio, abs_error, s=12)
        if slope is not None and ratio.size:
            xs = np.linspace(ratio.min(), ratio.max(), 2)
            ax.plot(xs, slope * xs + intercept, color="C3", lw=1, label=f"slope {slope:.3f}")
            ax.legend(loc="upper right")
        ax.set_xlabel("minority-label ratio")
        ax.set_ylabel("|predicted - true| final performance")
        return _save(fig, path)


def plot_split_comparison(comparisons: Sequence[SplitComparison], path) -> Path:
    """Box summary of |M/O - 1| for each way of estimating the pilot score."""
    names = ("single_split", "five_fold", "multiple_split", "full_test")
    data = [[c.error_rates[n] for c in comparisons] for n in names]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.boxplot(data, showmeans=True)
        ax.set_xticks(range(1, len(names) + 1), [n.replace("_", " ") for n in names])
        ax.set_ylabel("error rate |M / O - 1|")
        return _save(fig, path)
