"""Cluster-level bootstrap evaluation of the budgeting methods.

Pilots and their curves are drawn once per dataset for a given seed; each
bootstrap repetition then re-splits the name clusters 80/20, trains the
learning methods on the training clusters and scores every method on the
test clusters.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .. import powerlaw
from ..budgeter import (
    PAPER_BINS,
    BinScheme,
    BudgetError,
    FeatureVector,
    assign_bin,
    featurize,
    make_quantile_bins,
    percent_grid,
    predict_features,
    train_budget_model,
)
from ..curves import CurveConfig, GroundTruth, LearningCurve, derive_seed, pilot_curve
from ..learners import ForestParams, r2_score
from ..tabular import draw_pilot
from .clustering import NameClusterIndex, cluster_datasets, default_cluster_count
from .corpus import CorpusEntry, _parallel_map

METHODS = ("powerlaw", "learning-LR", "learning-RF")
REPORT_VERSION = 1


class BenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    splits: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    repetitions: int
    seed: int


def bootstrap_split(index: NameClusterIndex, train_frac: float = 0.8, reps: int = 40,
                    seed: int = 0) -> SplitPlan:
    """Independent 80/20 cluster splits; a cluster's datasets travel together."""
    k = index.k
    n_train = int(train_frac * k)
    if k < 2 or not 1 <= n_train < k:
        raise BenchmarkError(f"cannot split {k} clusters with train_frac={train_frac}")
    splits = []
    for r in range(reps):
        perm = np.random.default_rng(derive_seed(seed, r)).permutation(k)
        splits.append((tuple(sorted(int(c) for c in perm[:n_train])),
                       tuple(sorted(int(c) for c in perm[n_train:]))))
    return SplitPlan(tuple(splits), reps, seed)


def acc_metrics(true_bins, pred_bins) -> tuple[float, float]:
    """Exact-bin accuracy and the fraction exactly one bin away."""
    t = np.asarray(true_bins, dtype=np.int64)
    p = np.asarray(pred_bins, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError("true and predicted bins differ in length")
    if t.size == 0:
        raise ValueError("empty input")
    gap = np.abs(t - p)
    return float(np.mean(gap == 0)), float(np.mean(gap == 1))


@dataclass(frozen=True)
class BenchmarkConfig:
    methods: tuple[str, ...] = METHODS
    pilot_size: int | str = 100  # or "varying"
    varying_range: tuple[int, int] = (100, 200)
    repetitions: int = 40
    train_frac: float = 0.8
    clusters: int | None = None
    curve_repetitions: int = 500
    curve_trees: int = 100
    # evenly spaced curve points between 10 and m - 10; None means every x
    grid_points: int | None = None
    bins: str = "quantile"  # "quantile" or "paper"
    ridge: float = 1e-2
    l2: float = 1e-4
    iters: int = 500
    meta_trees: int = 100
    seed: int = 0

    def __post_init__(self):
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise BenchmarkError(f"unknown methods: {sorted(unknown)}")
        if self.pilot_size != "varying" and not isinstance(self.pilot_size, int):
            raise BenchmarkError("pilot_size must be an integer or 'varying'")
        if self.bins not in ("quantile", "paper"):
            raise BenchmarkError("bins must be 'quantile' or 'paper'")
        lo, hi = self.varying_range
        if self.varying and not 100 <= lo <= hi:
            # s at 90% of m must leave 10 held-out rows
            raise BenchmarkError("varying pilot sizes must satisfy 100 <= low <= high")

    @property
    def varying(self) -> bool:
        return self.pilot_size == "varying"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["varying_range"] = list(self.varying_range)
        return d


def fixed_grid(m: int, points: int | None) -> list[int]:
    lo, hi = 10, m - 10
    if hi < lo:
        raise BenchmarkError(f"pilot size {m} is too small for a curve")
    if points is None or points >= hi - lo + 1:
        return list(range(lo, hi + 1))
    return sorted(set(int(round(v)) for v in np.linspace(lo, hi, points)))


@dataclass(frozen=True)
class PilotRecord:
    name: str
    cluster: int
    m: int
    curve: LearningCurve
    class_counts: tuple[int, ...]

    @property
    def minority_ratio(self) -> float:
        counts = np.array([c for c in self.class_counts if c > 0], dtype=np.float64)
        return float(counts.min() / counts.sum())


def _pilot_job(entry: CorpusEntry, m: int, grid, config: BenchmarkConfig, i: int):
    pilot = draw_pilot(entry.split, m, seed=derive_seed(config.seed, i, 0))
    curve = pilot_curve(
        pilot,
        CurveConfig(repetitions=config.curve_repetitions, grid=tuple(grid),
                    seed=derive_seed(config.seed, i, 1)),
        ForestParams(n_trees=config.curve_trees),
    )
    return curve, tuple(int(c) for c in pilot.data.class_counts())


def build_pilots(corpus: Sequence[CorpusEntry], index: NameClusterIndex, config: BenchmarkConfig,
                 jobs: int = 1) -> list[PilotRecord]:
    jobs_args = []
    for i, entry in enumerate(corpus):
        if config.varying:
            lo, hi = config.varying_range
            m = int(np.random.default_rng(derive_seed(config.seed, i, 2)).integers(lo, hi + 1))
            grid = percent_grid(m)
        else:
            m = int(config.pilot_size)
            grid = fixed_grid(m, config.grid_points)
        jobs_args.append((entry, m, grid, config, i))
    results = _parallel_map(_pilot_job, jobs_args, jobs)
    return [
        PilotRecord(entry.name, int(index.labels[i]), args[1], curve, counts)
        for i, (entry, args, (curve, counts)) in enumerate(zip(corpus, jobs_args, results))
    ]


@dataclass
class MethodScore:
    r2_per_rep: list[float] = field(default_factory=list)
    acc0_per_rep: list[float] = field(default_factory=list)
    acc1_per_rep: list[float] = field(default_factory=list)

    @property
    def r2_undefined_reps(self) -> int:
        return sum(1 for v in self.r2_per_rep if not np.isfinite(v))

    @property
    def r2(self) -> float | None:
        defined = [v for v in self.r2_per_rep if np.isfinite(v)]
        return float(np.mean(defined)) if defined else None

    @property
    def acc0(self) -> float:
        return float(np.mean(self.acc0_per_rep))

    @property
    def acc1(self) -> float:
        return float(np.mean(self.acc1_per_rep))

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "r2_undefined_reps": self.r2_undefined_reps,
            "acc0": self.acc0,
            "acc1": self.acc1,
            "r2_per_rep": [v if np.isfinite(v) else None for v in self.r2_per_rep],
            "acc0_per_rep": self.acc0_per_rep,
            "acc1_per_rep": self.acc1_per_rep,
        }


@dataclass
class EvalReport:
    config: BenchmarkConfig
    methods: dict[str, MethodScore]
    rows: list[dict]
    pilots: list[PilotRecord]
    ground_truths: list[GroundTruth]
    cluster_index: NameClusterIndex
    plan: SplitPlan

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "config": self.config.to_dict(),
            "corpus": {
                "n_datasets": len(self.pilots),
                "n_clusters": self.cluster_index.k,
                "datasets": [
                    {"name": p.name, "cluster": p.cluster, "m": p.m,
                     "minority_ratio": p.minority_ratio,
                     "final_performance": gt.final_performance,
                     "needed_amount": gt.needed_amount}
                    for p, gt in zip(self.pilots, self.ground_truths)
                ],
            },
            "methods": {name: score.to_dict() for name, score in self.methods.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def rows_csv(self) -> str:
        buf = io.StringIO()
        fields = ["rep", "method", "dataset", "cluster", "m", "true_final", "pred_final",
                  "true_needed", "true_bin", "pred_bin"]
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def mean_abs_error(self, method: str) -> dict[str, float]:
        """Per-dataset mean |pred - true| final-performance error over test appearances."""
        errs: dict[str, list[float]] = {}
        for row in self.rows:
            if row["method"] == method:
                errs.setdefault(row["dataset"], []).append(abs(row["pred_final"] - row["true_final"]))
        return {k: float(np.mean(v)) for k, v in errs.items()}


def pilot_features(pilots: Sequence[PilotRecord], varying: bool) -> list[FeatureVector]:
    mode = "percent" if varying else "fixed"
    return [featurize(p.curve, mode, None if varying else [int(x) for x in p.curve.grid])
            for p in pilots]


def needed_targets(gts, features, varying):
    return np.array([gt.needed_amount / fv.m if varying else gt.needed_amount
                     for gt, fv in zip(gts, features)], dtype=np.float64)


def scheme_for(labels: np.ndarray, fallback: np.ndarray, config: BenchmarkConfig) -> BinScheme:
    mode = "ratio" if config.varying else "fixed-count"
    if config.bins == "paper" and not config.varying:
        return PAPER_BINS
    for values in (labels, fallback):
        try:
            return make_quantile_bins(values, mode=mode)
        except BudgetError:
            continue
    if config.varying:
        raise BenchmarkError("needed-amount ratios are too concentrated for five bins")
    return PAPER_BINS


def _powerlaw_predictions(pilots, varying):
    finals, needed = [], []
    for p in pilots:
        fit = powerlaw.fit_power_law(p.curve)
        finals.append(powerlaw.extrapolate_final(fit))
        n = powerlaw.extrapolate_needed(fit)
        needed.append(n / p.m if varying else n)
    return np.array(finals), np.array(needed, dtype=np.float64)


def run_benchmark(corpus: Sequence[CorpusEntry], config: BenchmarkConfig = BenchmarkConfig(),
                  jobs: int = 1, pilots: Sequence[PilotRecord] | None = None) -> EvalReport:
    if any(e.ground_truth is None for e in corpus):
        raise BenchmarkError("every corpus entry needs ground truth (see attach_ground_truth)")
    names = [e.name for e in corpus]
    k = config.clusters if config.clusters is not None else default_cluster_count(len(names))
    index = cluster_datasets(names, k)
    plan = bootstrap_split(index, config.train_frac, config.repetitions, config.seed)
    if pilots is None:
        pilots = build_pilots(corpus, index, config, jobs)
    gts = [e.ground_truth for e in corpus]
    features = pilot_features(pilots, config.varying)
    y_final = np.array([gt.final_performance for gt in gts])
    y_need = needed_targets(gts, features, config.varying)
    clusters = np.array([p.cluster for p in pilots])

    if "powerlaw" in config.methods:
        pl_final, pl_need = _powerlaw_predictions(pilots, config.varying)

    scores = {m: MethodScore() for m in config.methods}
    rows: list[dict] = []
    for rep, (train_c, test_c) in enumerate(plan.splits):
        train = np.flatnonzero(np.isin(clusters, train_c))
        test = np.flatnonzero(np.isin(clusters, test_c))
        if train.size == 0 and any(m != "powerlaw" for m in config.methods):
            raise BenchmarkError("training split is empty")
        scheme = scheme_for(y_need[train], y_need, config)
        true_bins = np.array([assign_bin(v, scheme) for v in y_need[test]])

        for method in config.methods:
            if method == "powerlaw":
                pred_final = pl_final[test]
                pred_bins = np.array([assign_bin(v, scheme) for v in pl_need[test]])
            else:
                kind = "LR" if method == "learning-LR" else "RF"
                model = train_budget_model(
                    [(features[i], gts[i]) for i in train], kind, scheme,
                    seed=derive_seed(config.seed, rep, 3), ridge=config.ridge, l2=config.l2,
                    iters=config.iters, forest=ForestParams(n_trees=config.meta_trees), min_corpus=2)
                raw, pred_bins = predict_features(model, [features[i] for i in test])
                pred_final = np.clip(raw, 0.0, 1.0)
            r2 = r2_score(y_final[test], pred_final) if test.size >= 2 else float("nan")
            a0, a1 = acc_metrics(true_bins, pred_bins)
            s = scores[method]
            s.r2_per_rep.append(r2)
            s.acc0_per_rep.append(a0)
            s.acc1_per_rep.append(a1)
            for j, i in enumerate(test):
                rows.append({
                    "rep": rep, "method": method, "dataset": names[i], "cluster": int(clusters[i]),
                    "m": pilots[i].m, "true_final": float(y_final[i]), "pred_final": float(pred_final[j]),
                    "true_needed": gts[i].needed_amount, "true_bin": int(true_bins[j]),
                    "pred_bin": int(pred_bins[j]),
                })
    return EvalReport(config, scores, rows, list(pilots), gts, index, plan)
