"""Diagnostic analyses run on top of a benchmark corpus."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..budgeter import OnePointResult, featurize, one_point_analysis, train_budget_model, coefficient_profile
from ..curves import SplitComparison, derive_seed, split_comparison
from ..learners import ForestParams
from ..tabular import draw_pilot
from .benchmark import EvalReport
from .corpus import CorpusEntry


@dataclass(frozen=True)
class BalanceAnalysis:
    names: tuple[str, ...]
    minority_ratio: np.ndarray
    abs_error: np.ndarray
    slope: float | None
    intercept: float | None


def balance_analysis(names: Sequence[str], minority_ratio, abs_error) -> BalanceAnalysis:
    """Pair each dataset's pilot minority ratio with its absolute error and fit a trend.

    The trend is the least-squares line ``error = slope * ratio + intercept``;
    it is undefined for fewer than two datasets or a constant ratio.
    """
    ratio = np.asarray(minority_ratio, dtype=np.float64)
    err = np.asarray(abs_error, dtype=np.float64)
    if ratio.shape != err.shape:
        raise ValueError("ratios and errors differ in length")
    slope = intercept = None
    if ratio.size >= 2 and np.ptp(ratio) > 0:
        slope, intercept = (float(v) for v in np.polyfit(ratio, err, 1))
    return BalanceAnalysis(tuple(names), ratio, err, slope, intercept)


def report_balance(report: EvalReport, method: str = "learning-LR") -> BalanceAnalysis:
    errors = report.mean_abs_error(method)
    pilots = [p for p in report.pilots if p.name in errors]
    return balance_analysis([p.name for p in pilots], [p.minority_ratio for p in pilots],
                            [errors[p.name] for p in pilots])


def one_point_profile(report: EvalReport, cv_folds: int | None = None) -> list[OnePointResult]:
    """R² of the single-feature fit at every curve position shared by all pilots."""
    corpus = [(p.curve, gt) for p, gt in zip(report.pilots, report.ground_truths)]
    shared = set(int(x) for x in corpus[0][0].grid)
    for curve, _ in corpus[1:]:
        shared &= set(int(x) for x in curve.grid)
    return [one_point_analysis(corpus, x, cv_folds, seed=report.config.seed) for x in sorted(shared)]


def report_coefficients(report: EvalReport) -> tuple[list[int], np.ndarray]:
    """Logistic coefficients of an LR budget model fitted on the whole corpus."""
    cfg = report.config
    mode = "percent" if cfg.varying else "fixed"
    corpus = [(featurize(p.curve, mode, None if cfg.varying else [int(x) for x in p.curve.grid]), gt)
              for p, gt in zip(report.pilots, report.ground_truths)]
    from .benchmark import needed_targets, scheme_for

    labels = needed_targets([gt for _, gt in corpus], [fv for fv, _ in corpus], cfg.varying)
    scheme = scheme_for(labels, labels, cfg)
    model = train_budget_model(corpus, "LR", scheme, seed=cfg.seed, ridge=cfg.ridge, l2=cfg.l2,
                               iters=cfg.iters, min_corpus=2)
    return list(corpus[0][0].positions), coefficient_profile(model)


def corpus_split_comparison(corpus: Sequence[CorpusEntry], m: int = 100, repetitions: int = 100,
                            n_trees: int = 100, seed: int = 0) -> list[SplitComparison]:
    out = []
    for i, entry in enumerate(corpus):
        pilot = draw_pilot(entry.split, m, seed=derive_seed(seed, i, 4))
        final = entry.ground_truth.final_performance if entry.ground_truth else None
        out.append(split_comparison(pilot, entry.split, repetitions=repetitions,
                                    params=ForestParams(n_trees=n_trees), seed=derive_seed(seed, i, 5),
                                    final=final))
    return out
