"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``. The ground truth of the
40-dataset synthetic corpus is cached in pytest's cache directory, so only the
first run pays for it (a few minutes on one core).
"""

import time

import numpy as np
import pytest

from databudget.budgeter import PAPER_BINS, assign_bin, featurize, predict_budget, predict_features, train_budget_model
from databudget.curves import (
    CurveConfig,
    GroundTruth,
    LearningCurve,
    final_performance,
    needed_amount,
    pilot_curve,
    split_comparison,
)
from databudget.evalharness import (
    BenchmarkConfig,
    GroundTruthConfig,
    acc_metrics,
    attach_ground_truth,
    cluster_datasets,
    name_similarity,
    run_benchmark,
    synthetic_corpus,
)
from databudget.learners import ForestParams, fit_predict, metric_vector, metric_vector_array, r2_score
from databudget.powerlaw import extrapolate_final, extrapolate_needed, fit_power_law
from databudget.tabular import SyntheticSpec, draw_pilot, generate_synthetic, subsample_and_split

# desk-scale harness settings: R=100 curve repetitions, 25-tree curve forests,
# 9 curve points, and a 100-row-step ground-truth grid
HARNESS = dict(repetitions=100, curve_repetitions=100, curve_trees=25, grid_points=9)
GT_CONFIG = GroundTruthConfig(repetitions=3, n_trees=25, grid=tuple(range(100, 2501, 100)))
SEEDS = range(10)
NARROW_SEEDS = range(3)


def report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {criterion}: {detail}", flush=True)
    assert ok, detail


@pytest.fixture(scope="module")
def corpus(request):
    cache = request.config.cache.mkdir("acceptance-groundtruth")
    entries, _ = attach_ground_truth(synthetic_corpus(40, seed=0), GT_CONFIG, cache_dir=cache)
    return entries


@pytest.fixture(scope="module")
def separable():
    # separation 10 with five classes in ten dimensions: O_D = 1, learnable from ~50 rows
    ds = generate_synthetic(SyntheticSpec(d=10, classes=5, separation=10.0, name="sep"), seed=0)
    return subsample_and_split(ds, seed=0)


@pytest.fixture(scope="module")
def harness_runs(corpus):
    """R^2 per method for every (m, seed), with wall times."""
    runs = {}
    for m, seeds in ((50, SEEDS), (200, NARROW_SEEDS)):
        for seed in seeds:
            t0 = time.perf_counter()
            rep = run_benchmark(corpus, BenchmarkConfig(pilot_size=m, seed=seed, **HARNESS))
            runs[m, seed] = ({k: s.r2 for k, s in rep.methods.items()}, time.perf_counter() - t0, rep)
    return runs


def gap(r2):
    return min(r2["learning-LR"], r2["learning-RF"]) - r2["powerlaw"]


# ---------------------------------------------------------------- 1. benchmark

def test_learning_beats_powerlaw_at_small_pilots(harness_runs, capsys):
    wins = [seed for seed in SEEDS if gap(harness_runs[50, seed][0]) > 0]
    slowest = max(t for _, t, _ in harness_runs.values())
    small = np.mean([gap(harness_runs[50, s][0]) for s in NARROW_SEEDS])
    large = np.mean([gap(harness_runs[200, s][0]) for s in NARROW_SEEDS])
    lines = "; ".join(f"m={m} seed={s} " + " ".join(f"{k}={v:.3f}" for k, v in r2.items())
                      for (m, s), (r2, _, _) in sorted(harness_runs.items()))
    ok = len(wins) >= 8 and large < small and slowest < 20 * 60
    report(capsys, "benchmark",
           ok, f"both learners beat powerlaw in {len(wins)}/10 runs at m=50; mean gap m=50 {small:.3f} "
               f"vs m=200 {large:.3f} (seeds {list(NARROW_SEEDS)}); slowest run {slowest:.0f}s; {lines}")


# ---------------------------------------------------------------- 2-3. power law

def brute_force_needed(b, c, threshold=0.99, N=2500):
    f = lambda x: min(1.0, max(0.0, 1.0 - b * x ** c))
    target = threshold * f(N)
    return next((x for x in range(1, N + 1) if f(x) > target), N)


def exact_curve(b, c, grid):
    return LearningCurve(grid, 1.0 - b * grid.astype(float) ** c, np.zeros(grid.size), 100)


def test_power_law_recovery(capsys):
    rng = np.random.default_rng(0)
    grid = np.arange(10, 91)
    t0 = time.perf_counter()
    worst, mismatches = 0.0, []
    for _ in range(100):
        b, c = rng.uniform(0.05, 1.0), rng.uniform(-1.0, -0.1)
        fit = fit_power_law(exact_curve(b, c, grid))
        worst = max(worst, abs(fit.b - b), abs(fit.c - c))
        # the scan runs on the fitted parameters, so only inversion is compared
        if extrapolate_needed(fit) != brute_force_needed(fit.b, fit.c):
            mismatches.append((b, c))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and not mismatches and elapsed < 5.0
    report(capsys, "power-law recovery", ok,
           f"max parameter error {worst:.2e}, {len(mismatches)} inversion mismatches, {elapsed:.2f}s")


def test_power_law_fixture(capsys):
    fit = fit_power_law(exact_curve(0.5, -0.5, np.arange(10, 91)))
    final, needed = extrapolate_final(fit), extrapolate_needed(fit, 0.99)
    scan = brute_force_needed(0.5, -0.5)
    ok = abs(final - 0.99) <= 1e-9 and needed == 632 == scan
    report(capsys, "power-law fixture", ok, f"final {final:.12f}, needed {needed}, scan {scan}")


# ---------------------------------------------------------------- 4. needed amount

def fine_scan_needed(split, grid, R, threshold, params):
    """Independent oracle: own RNG stream, every size in ``grid``, direct dominance test."""
    tr, te = split.train, split.test
    full = metric_vector_array(te.labels, fit_predict(tr.rows, tr.labels, te.rows, tr.n_classes, params))
    rng = np.random.default_rng(12345)
    for n in grid:
        vecs = []
        for _ in range(R):
            idx = rng.choice(tr.n, size=n, replace=False)
            p = ForestParams(n_trees=params.n_trees, seed=int(rng.integers(2 ** 31)))
            vecs.append(metric_vector_array(te.labels, fit_predict(tr.rows[idx], tr.labels[idx], te.rows,
                                                                   tr.n_classes, p)))
        if np.all(np.mean(vecs, axis=0) > threshold * full):
            return n
    return tr.n


def test_needed_amount_against_fine_scan(separable, capsys):
    params = ForestParams(n_trees=25)
    step = 10
    coarse = list(range(step, 201, step))
    got = {t: needed_amount(separable, coarse, 20, t, params, seed=0) for t in (0.9, 0.95, 0.99)}
    oracle = fine_scan_needed(separable, range(2, 201), 20, 0.99, params)
    monotone = got[0.9] <= got[0.95] <= got[0.99]
    ok = abs(got[0.99] - oracle) <= step and monotone
    report(capsys, "needed amount", ok,
           f"coarse-grid Need_D {got[0.99]} vs fine scan {oracle} (step {step}); by threshold {got}")


# ---------------------------------------------------------------- 5. smoothing

def test_repetition_smoothing(capsys):
    ds = generate_synthetic(SyntheticSpec(d=4, classes=2, separation=1.5, name="mid"), seed=5)
    pilot = draw_pilot(subsample_and_split(ds, seed=0), 100, seed=0)
    params = ForestParams(n_trees=25)
    t0 = time.perf_counter()
    sd = {}
    for R in (20, 500):
        values = [pilot_curve(pilot, CurveConfig(repetitions=R, grid=(50,), seed=1000 + run), params).s[0]
                  for run in range(20)]
        sd[R] = float(np.std(values, ddof=1))
    elapsed = time.perf_counter() - t0
    ratio, predicted = sd[20] / sd[500], np.sqrt(500 / 20)
    ok = sd[500] < sd[20] and predicted / 3 <= ratio <= predicted * 3 and elapsed < 600
    report(capsys, "repetition smoothing", ok,
           f"sd(s_50) R=20 {sd[20]:.5f}, R=500 {sd[500]:.5f}, ratio {ratio:.2f} vs 1/sqrt(R) {predicted:.2f}, "
           f"{elapsed:.0f}s")


# ---------------------------------------------------------------- 6. metrics

def test_metric_suite(capsys):
    mv = metric_vector([0, 0, 1, 1], [0, 0, 0, 0])
    hand = (mv.accuracy == 0.5 and mv.f1_macro == pytest.approx(1 / 3, abs=1e-15)
            and mv.precision_macro == 0.25 and mv.recall_macro == 0.5)
    r2 = r2_score([0, 1, 2], [0, 1, 1]) == 0.5
    acc = acc_metrics([0, 1, 2, 3], [1, 1, 2, 0]) == (0.5, 0.25)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        t, p = rng.integers(0, 5, n), rng.integers(0, 5, n)
        a0, a1 = acc_metrics(t, p)
        worst = max(worst, abs(a0 + a1 + np.mean(np.abs(t - p) >= 2) - 1.0))
    ok = hand and r2 and acc and worst <= 1e-12
    report(capsys, "metric suite", ok,
           f"metric vector {hand}, r2 {r2}, acc {acc}, partition max deviation {worst:.1e}")


# ---------------------------------------------------------------- 7. bins

def test_paper_bin_edges(capsys):
    cases = {104: 0, 105: 1, 227: 1, 228: 2, 430: 2, 431: 3, 805: 3, 806: 4, 2000: 4}
    got = {v: assign_bin(v, PAPER_BINS) for v in cases}
    report(capsys, "bin assignment", got == cases, f"{got}")


# ---------------------------------------------------------------- 8. clustering

def test_clustering_and_parallel_reproducibility(corpus, capsys):
    import difflib

    sim = name_similarity("House", "House_8L")
    ref = difflib.SequenceMatcher(None, "House", "House_8L", autojunk=False).ratio()
    labels = cluster_datasets(["House", "House_8L", "volcano_a", "volcano_b"], 2).labels
    grouped = labels[0] == labels[1] != labels[2] == labels[3]
    cfg = BenchmarkConfig(pilot_size=50, seed=0, **HARNESS)
    one = run_benchmark(corpus, cfg, jobs=1)
    eight = run_benchmark(corpus, cfg, jobs=8)
    same = one.to_json() == eight.to_json() and one.rows_csv() == eight.rows_csv()
    ok = abs(sim - 10 / 13) <= 1e-12 and abs(ref - 10 / 13) <= 1e-12 and grouped and same
    report(capsys, "clustering", ok,
           f"similarity {sim!r} (reference {ref!r}), fixture labels {labels.tolist()}, "
           f"1-job and 8-job reports identical: {same}")


# ---------------------------------------------------------------- 9. degenerate corpus

def saturating_curves(n, seed):
    rng = np.random.default_rng(seed)
    grid = np.arange(10, 91)
    out = []
    for _ in range(n):
        b, c = rng.uniform(0.1, 1.0), rng.uniform(-0.9, -0.1)
        s = np.clip(1 - b * grid ** c + rng.normal(0, 0.003, grid.size), 0, 1)
        out.append(LearningCurve(grid, s, np.zeros(grid.size), 100))
    return out


def test_degenerate_corpus(capsys):
    train_curves = saturating_curves(120, 0)
    ref = LearningCurve(np.array([2500]), np.array([0.0]), np.zeros(1), 2500)
    corpus = [(featurize(c), GroundTruth(float(c.s[-1]), 50 + (40 * i) % 2400, ref))
              for i, c in enumerate(train_curves)]
    model = train_budget_model(corpus, "LR", PAPER_BINS)
    raw, _ = predict_features(model, [fv for fv, _ in corpus])
    r2 = r2_score([gt.final_performance for _, gt in corpus], raw)
    worst = max(abs(predict_budget(model, c).predicted_final - c.s[-1]) for c in saturating_curves(50, 1))
    ok = r2 > 0.999 and worst <= 0.01
    report(capsys, "degenerate corpus", ok, f"train R2 {r2:.6f}, worst unseen error {worst:.4f}")


# ---------------------------------------------------------------- 10. split comparison

def test_split_comparison_direction(separable, capsys):
    params = ForestParams(n_trees=25)
    final = final_performance(separable, params)
    names = ("single_split", "five_fold", "multiple_split", "full_test")
    errors = {k: [] for k in names}
    for seed in range(20):
        pilot = draw_pilot(separable, 100, seed=seed)
        cmp = split_comparison(pilot, separable, repetitions=100, params=params, seed=seed, final=final)
        for k in names:
            errors[k].append(cmp.error_rates[k])
    mean = {k: float(np.mean(v)) for k, v in errors.items()}
    ok = mean["full_test"] < mean["multiple_split"] < mean["single_split"]
    report(capsys, "split comparison", ok,
           f"O_D {final:.4f}; mean error " + ", ".join(f"{k} {v:.5f}" for k, v in mean.items()))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
