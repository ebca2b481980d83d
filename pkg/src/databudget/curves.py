"""Learning curves from pilot data and benchmark ground truth.

A pilot curve holds, for each train size x, the mean macro F1 over R
random splits of the pilot into x training rows and the remaining test
rows. Ground truth for a full dataset is the final performance of a
forest trained on all of D_train and the smallest train size whose
averaged metric vector beats a fraction of the full-train vector.

Every repetition draws its own seed from (seed, x, repetition), so the
curve does not depend on evaluation order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .learners import ForestParams, MetricVector, fit_predict, metric_vector_array
from .tabular import DatasetSplit, PilotStudy, TabularDataset

MIN_HELD_OUT = 10
DEFAULT_REPETITIONS = 500
DEFAULT_THRESHOLD = 0.99

_METRIC_NAMES = ("accuracy", "f1_macro", "recall_macro", "precision_macro")


class CurveError(ValueError):
    pass


def derive_seed(seed: int, *keys: int) -> int:
    """Stable 62-bit child seed for ``(seed, *keys)``."""
    words = np.random.SeedSequence([int(seed), *(int(k) for k in keys)]).generate_state(2)
    return int((int(words[0]) << 30) ^ int(words[1]))


def default_pilot_grid(m: int) -> list[int]:
    return list(range(10, m - MIN_HELD_OUT + 1))


def default_needed_grid(n_train: int = 2500) -> list[int]:
    grid = list(range(10, 101, 10)) + list(range(125, 501, 25)) + list(range(600, 2501, 100))
    grid = [g for g in grid if g <= n_train]
    if n_train not in grid:
        grid.append(n_train)
    return grid


@dataclass(frozen=True)
class CurveConfig:
    repetitions: int = DEFAULT_REPETITIONS
    grid: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise CurveError("repetitions must be >= 1")
        if self.grid is not None:
            g = tuple(int(x) for x in self.grid)
            if not g or g[0] < 1 or any(b <= a for a, b in zip(g, g[1:])):
                raise CurveError("grid must be strictly increasing and start at >= 1")
            object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class LearningCurve:
    grid: np.ndarray
    s: np.ndarray
    per_x_stddev: np.ndarray
    m: int
    # (len(grid), 4) mean accuracy / F1 / recall / precision, reference curves only
    metrics: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not len(self.grid) == len(self.s) == len(self.per_x_stddev):
            raise CurveError("grid, s and stddev lengths differ")

    def value_at(self, x: int) -> float:
        hits = np.flatnonzero(self.grid == x)
        if hits.size == 0:
            raise CurveError(f"curve has no point at x={x}")
        return float(self.s[hits[0]])

    def has(self, x: int) -> bool:
        return bool(np.any(self.grid == x))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "s", "stddev"])
        for x, s, sd in zip(self.grid, self.s, self.per_x_stddev):
            writer.writerow([int(x), repr(float(s)), repr(float(sd))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, m: int) -> "LearningCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            grid=np.array([int(r["x"]) for r in rows], dtype=np.int64),
            s=np.array([float(r["s"]) for r in rows]),
            per_x_stddev=np.array([float(r["stddev"]) for r in rows]),
            m=m,
        )

    def to_dict(self) -> dict:
        out = {
            "m": self.m,
            "grid": [int(x) for x in self.grid],
            "s": [float(v).hex() for v in self.s],
            "stddev": [float(v).hex() for v in self.per_x_stddev],
        }
        if self.metrics is not None:
            out["metrics"] = [[float(v).hex() for v in row] for row in self.metrics]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LearningCurve":
        metrics = data.get("metrics")
        return cls(
            grid=np.array(data["grid"], dtype=np.int64),
            s=np.array([float.fromhex(v) for v in data["s"]]),
            per_x_stddev=np.array([float.fromhex(v) for v in data["stddev"]]),
            m=int(data["m"]),
            metrics=None if metrics is None else np.array(
                [[float.fromhex(v) for v in row] for row in metrics]),
        )


def save_curve(curve: LearningCurve, path) -> None:
    Path(path).write_text(curve.to_csv(), encoding="utf-8")


def _score_split(data: TabularDataset, train_idx, test_X, test_y, params: ForestParams) -> np.ndarray:
    pred = fit_predict(data.rows[train_idx], data.labels[train_idx], test_X,
                       data.n_classes, params)
    return metric_vector_array(test_y, pred)


def _stddev(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def pilot_curve(pilot: PilotStudy, config: CurveConfig = CurveConfig(),
                params: ForestParams = ForestParams()) -> LearningCurve:
    """Multiple-splitting curve over the pilot; F1 macro per train size."""
    data = pilot.data
    m = pilot.m
    grid = config.grid if config.grid is not None else tuple(default_pilot_grid(m))
    if not grid:
        raise CurveError(f"pilot of {m} rows leaves no feasible grid")
    if grid[-1] > m - MIN_HELD_OUT:
        raise CurveError(f"grid point {grid[-1]} leaves fewer than {MIN_HELD_OUT} test rows (m={m})")
    if np.unique(data.labels).size < 2:
        raise CurveError("pilot contains a single class")

    R = config.repetitions
    s = np.empty(len(grid))
    sd = np.empty(len(grid))
    for i, x in enumerate(grid):
        scores = np.empty(R)
        for r in range(R):
            child = derive_seed(config.seed, x, r)
            perm = np.random.default_rng(child).permutation(m)
            test = perm[x:]
            scores[r] = _score_split(data, perm[:x], data.rows[test], data.labels[test],
                                     params.with_seed(child))[1]
        s[i] = scores.mean()
        sd[i] = _stddev(scores)
    return LearningCurve(np.array(grid, dtype=np.int64), s, sd, m)


def _full_train_metrics(split: DatasetSplit, params: ForestParams) -> np.ndarray:
    train = split.train
    return _score_split(train, np.arange(train.n), split.test.rows, split.test.labels, params)


def final_performance(split: DatasetSplit, params: ForestParams = ForestParams()) -> float:
    """Macro F1 on D_test of a forest trained on all of D_train."""
    return float(_full_train_metrics(split, params)[1])


def reference_curve(split: DatasetSplit, grid, repetitions: int,
                    params: ForestParams = ForestParams(), seed: int = 0) -> LearningCurve:
    """Curve over D_train subsample sizes, always scored on D_test.

    At ``x == |D_train|`` there is exactly one subset, so the point is the
    full-train score computed with ``params`` as given.
    """
    train, test = split.train, split.test
    grid = [int(x) for x in grid]
    if not grid or grid[0] < 1 or grid[-1] > train.n or any(b <= a for a, b in zip(grid, grid[1:])):
        raise CurveError(f"grid must be increasing within [1, {train.n}]")
    if repetitions < 1:
        raise CurveError("repetitions must be >= 1")

    means = np.empty((len(grid), 4))
    sd = np.empty(len(grid))
    for i, x in enumerate(grid):
        if x == train.n:
            means[i] = _full_train_metrics(split, params)
            sd[i] = 0.0
            continue
        scores = np.empty((repetitions, 4))
        for r in range(repetitions):
            child = derive_seed(seed, x, r)
            idx = np.random.default_rng(child).choice(train.n, size=x, replace=False)
            scores[r] = _score_split(train, idx, test.rows, test.labels, params.with_seed(child))
        means[i] = scores.mean(axis=0)
        sd[i] = _stddev(scores[:, 1])
    return LearningCurve(np.array(grid, dtype=np.int64), means[:, 1].copy(), sd, train.n,
                         metrics=means)


def scan_needed(curve: LearningCurve, full_vector, threshold: float = DEFAULT_THRESHOLD) -> tuple[int, bool]:
    """Smallest grid size whose mean metric vector beats ``threshold * full_vector``.

    Returns ``(n, reached)``; when no grid point qualifies ``n`` is the
    training-set size and ``reached`` is False.
    """
    if curve.metrics is None:
        raise CurveError("needed-amount scan requires a reference curve with all metrics")
    target = threshold * np.asarray(full_vector, dtype=np.float64)
    for x, vec in zip(curve.grid, curve.metrics):
        if np.all(vec > target):
            return int(x), True
    return int(curve.m), False


def needed_amount(split: DatasetSplit, grid=None, repetitions: int = 20,
                  threshold: float = DEFAULT_THRESHOLD, params: ForestParams = ForestParams(),
                  seed: int = 0) -> int:
    grid = default_needed_grid(split.train.n) if grid is None else grid
    curve = reference_curve(split, grid, repetitions, params, seed)
    return scan_needed(curve, _full_train_metrics(split, params), threshold)[0]


class ScoreOracle(Protocol):
    def __call__(self, split: DatasetSplit) -> MetricVector: ...


@dataclass(frozen=True)
class ForestOracle:
    """Default final-performance oracle: a forest on all of D_train."""

    params: ForestParams = ForestParams()

    def __call__(self, split: DatasetSplit) -> MetricVector:
        return MetricVector.from_array(_full_train_metrics(split, self.params))


@dataclass(frozen=True)
class ScoreFileOracle:
    """Reads externally computed full-train scores.

    The file is JSON: ``{dataset_name: {"accuracy": .., "f1_macro": ..,
    "recall_macro": .., "precision_macro": ..}}``.
    """

    path: str

    def __call__(self, split: DatasetSplit) -> MetricVector:
        table = json.loads(Path(self.path).read_text(encoding="utf-8"))
        if split.source_name not in table:
            raise CurveError(f"no external score for {split.source_name!r}")
        entry = table[split.source_name]
        return MetricVector(**{k: float(entry[k]) for k in _METRIC_NAMES})


@dataclass(frozen=True)
class GroundTruth:
    final_performance: float
    needed_amount: int
    reference_curve: LearningCurve
    needs_all_data: bool = False
    full_vector: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.final_performance <= 1.0:
            raise CurveError("final performance must lie in [0, 1]")
        if self.needed_amount > self.reference_curve.m:
            raise CurveError("needed amount exceeds the training set size")

    def to_dict(self) -> dict:
        return {
            "final_performance": float(self.final_performance).hex(),
            "needed_amount": int(self.needed_amount),
            "needs_all_data": bool(self.needs_all_data),
            "full_vector": [float(v).hex() for v in self.full_vector],
            "reference_curve": self.reference_curve.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        return cls(
            final_performance=float.fromhex(data["final_performance"]),
            needed_amount=int(data["needed_amount"]),
            reference_curve=LearningCurve.from_dict(data["reference_curve"]),
            needs_all_data=bool(data["needs_all_data"]),
            full_vector=tuple(float.fromhex(v) for v in data["full_vector"]),
        )


def compute_ground_truth(split: DatasetSplit, grid=None, repetitions: int = 20,
                         threshold: float = DEFAULT_THRESHOLD,
                         params: ForestParams = ForestParams(), seed: int = 0,
                         oracle: Callable[[DatasetSplit], MetricVector] | None = None) -> GroundTruth:
    grid = default_needed_grid(split.train.n) if grid is None else list(grid)
    curve = reference_curve(split, grid, repetitions, params, seed)
    full = _full_train_metrics(split, params)
    needed, reached = scan_needed(curve, full, threshold)
    o_d = float(full[1]) if oracle is None else oracle(split).f1_macro
    return GroundTruth(o_d, needed, curve, needs_all_data=not reached,
                       full_vector=tuple(float(v) for v in full))


@dataclass(frozen=True)
class SplitComparison:
    single_split: float
    five_fold: float
    multiple_split: float
    full_test: float
    final_performance: float

    @property
    def error_rates(self) -> dict[str, float]:
        o = self.final_performance
        return {
            name: abs(getattr(self, name) / o - 1.0) if o > 0 else float("inf")
            for name in ("single_split", "five_fold", "multiple_split", "full_test")
        }


def split_comparison(pilot: PilotStudy, split: DatasetSplit, x: int | None = None,
                     repetitions: int = DEFAULT_REPETITIONS,
                     params: ForestParams = ForestParams(), seed: int = 0,
                     final: float | None = None) -> SplitComparison:
    """Estimate the train-on-x score four ways and compare each with O_D."""
    data, m = pilot.data, pilot.m
    x = int(0.8 * m) if x is None else x
    if m < 5:
        raise CurveError("five-fold needs a pilot of at least 5 rows")
    if not 1 <= x < m:
        raise CurveError(f"x={x} must lie in [1, m)")

    child = derive_seed(seed, x, 0, 1)
    perm = np.random.default_rng(child).permutation(m)
    single = _score_split(data, perm[:x], data.rows[perm[x:]], data.labels[perm[x:]],
                          params.with_seed(child))[1]

    perm = np.random.default_rng(derive_seed(seed, 5, 0, 2)).permutation(m)
    folds = np.array_split(perm, 5)
    fold_scores = []
    for k, test in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != k])
        fold_scores.append(_score_split(data, train, data.rows[test], data.labels[test],
                                        params.with_seed(derive_seed(seed, 5, k, 3)))[1])
    five = float(np.mean(fold_scores))

    # multiple splitting only needs x held-in, relax the held-out floor here
    multiple_scores = np.empty(repetitions)
    full_scores = np.empty(repetitions)
    for r in range(repetitions):
        child = derive_seed(seed, x, r)
        perm = np.random.default_rng(child).permutation(m)
        p = params.with_seed(child)
        multiple_scores[r] = _score_split(data, perm[:x], data.rows[perm[x:]],
                                          data.labels[perm[x:]], p)[1]
        full_scores[r] = _score_split(data, perm[:x], split.test.rows, split.test.labels, p)[1]

    o_d = final_performance(split, params) if final is None else final
    return SplitComparison(float(single), five, float(multiple_scores.mean()),
                           float(full_scores.mean()), float(o_d))
