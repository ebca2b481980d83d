import numpy as np
import pytest

from databudget.curves import (
    CurveConfig,
    CurveError,
    GroundTruth,
    LearningCurve,
    ScoreFileOracle,
    compute_ground_truth,
    default_needed_grid,
    default_pilot_grid,
    derive_seed,
    final_performance,
    needed_amount,
    pilot_curve,
    reference_curve,
    scan_needed,
    save_curve,
    split_comparison,
)
from databudget.learners import ForestParams, metric_vector_array
from databudget.tabular import SyntheticSpec, draw_pilot, generate_synthetic, subsample_and_split

FAST = ForestParams(n_trees=10)


@pytest.fixture(scope="module")
def separable():
    ds = generate_synthetic(SyntheticSpec(d=4, classes=2, separation=10.0, name="sep"), seed=11)
    return subsample_and_split(ds, seed=1)


@pytest.fixture(scope="module")
def noise():
    ds = generate_synthetic(SyntheticSpec(d=4, classes=2, separation=0.0, name="noise"), seed=12)
    return subsample_and_split(ds, seed=2)


def test_grids():
    assert default_pilot_grid(100) == list(range(10, 91))
    g = default_needed_grid(2500)
    assert g[:10] == list(range(10, 101, 10)) and g[10] == 125 and g[-1] == 2500
    assert all(a < b for a, b in zip(g, g[1:]))


def test_derive_seed_stable_and_distinct():
    assert derive_seed(0, 5, 3) == derive_seed(0, 5, 3)
    assert len({derive_seed(0, x, r) for x in range(20) for r in range(20)}) == 400


def test_pilot_curve_shape_and_range(separable):
    pilot = draw_pilot(separable, 100, seed=0)
    curve = pilot_curve(pilot, CurveConfig(repetitions=5), FAST)
    assert len(curve.grid) == 81 and curve.grid[0] == 10 and curve.grid[-1] == 90
    assert np.all((curve.s >= 0) & (curve.s <= 1))
    assert len(curve.per_x_stddev) == 81


def test_pilot_curve_separable_high(separable):
    pilot = draw_pilot(separable, 100, seed=3)
    curve = pilot_curve(pilot, CurveConfig(repetitions=10, grid=tuple(range(20, 91, 10))), FAST)
    assert np.all(curve.s >= 0.95)


def test_pilot_curve_deterministic(separable):
    pilot = draw_pilot(separable, 60, seed=4)
    cfg = CurveConfig(repetitions=7, grid=(10, 25, 50), seed=9)
    a, b = pilot_curve(pilot, cfg, FAST), pilot_curve(pilot, cfg, FAST)
    assert np.array_equal(a.s, b.s) and np.array_equal(a.per_x_stddev, b.per_x_stddev)


def test_pilot_curve_point_independent_of_grid(separable):
    # seeds depend on (seed, x, rep) only, so s_x does not move with its neighbours
    pilot = draw_pilot(separable, 60, seed=4)
    a = pilot_curve(pilot, CurveConfig(repetitions=5, grid=(20, 30), seed=1), FAST)
    b = pilot_curve(pilot, CurveConfig(repetitions=5, grid=(30,), seed=1), FAST)
    assert a.value_at(30) == b.value_at(30)


def test_pilot_curve_errors(separable):
    pilot = draw_pilot(separable, 50, seed=0)
    with pytest.raises(CurveError):
        pilot_curve(pilot, CurveConfig(repetitions=2, grid=(10, 45)), FAST)
    with pytest.raises((CurveError, ValueError)):
        CurveConfig(repetitions=0)
    with pytest.raises((CurveError, ValueError)):
        CurveConfig(grid=(20, 10))


def test_repetitions_smooth_the_estimate(separable):
    ds = generate_synthetic(SyntheticSpec(d=4, classes=2, separation=1.5, name="mid"), seed=5)
    split = subsample_and_split(ds, seed=0)
    pilot = draw_pilot(split, 100, seed=0)
    values = {1: [], 30: []}
    for R in values:
        for run in range(20):
            c = pilot_curve(pilot, CurveConfig(repetitions=R, grid=(50,), seed=run), ForestParams(n_trees=5))
            values[R].append(c.s[0])
    assert np.std(values[30]) < np.std(values[1])


def test_final_performance_separable_and_noise(separable, noise):
    assert final_performance(separable, FAST) > 0.99
    assert abs(final_performance(noise, ForestParams()) - 0.5) <= 0.1


def test_reference_curve_last_point_is_final(separable):
    params = ForestParams(n_trees=10, seed=3)
    curve = reference_curve(separable, [separable.train.n], 3, params, seed=0)
    assert curve.s[0] == final_performance(separable, params)


def test_reference_curve_nearly_monotone(separable):
    curve = reference_curve(separable, [100, 500, 2500], 3, FAST, seed=0)
    assert np.all(np.diff(curve.s) >= -0.02)


def brute_force_needed(split, grid, R, threshold, params, seed):
    """Independent scan: recompute every averaged vector and test dominance directly."""
    full = metric_vector_array(
        split.test.labels,
        __import__("databudget.learners", fromlist=["fit_predict"]).fit_predict(
            split.train.rows, split.train.labels, split.test.rows, split.train.n_classes, params))
    ref = reference_curve(split, grid, R, params, seed)
    for n, vec in zip(grid, ref.metrics):
        if all(v > threshold * f for v, f in zip(vec, full)):
            return n
    return split.train.n


def test_needed_amount_matches_scan(separable):
    grid = list(range(10, 101, 10))
    got = needed_amount(separable, grid, 3, 0.99, FAST, seed=0)
    assert got == brute_force_needed(separable, grid, 3, 0.99, FAST, 0)
    assert got <= 100


def test_needed_amount_threshold_monotone(separable):
    grid = [10, 20, 30, 50, 80, 120, 200]
    needs = [needed_amount(separable, grid, 3, t, FAST, seed=0) for t in (0.0, 0.9, 0.95, 0.99)]
    assert needs[0] == grid[0]
    assert needs == sorted(needs)


def test_needed_sentinel_when_never_dominated():
    # a learnable task whose grid stops far short of the data it needs
    ds = generate_synthetic(SyntheticSpec(d=6, classes=3, separation=2.5, name="hard"), seed=13)
    split = subsample_and_split(ds, seed=0)
    gt = compute_ground_truth(split, [10, 12], 2, 0.99, FAST, seed=0)
    assert max(gt.reference_curve.s) < 0.9 * gt.final_performance
    assert gt.needed_amount == split.train.n and gt.needs_all_data


def test_scan_needed_strict_dominance():
    curve = LearningCurve(np.array([10, 20]), np.array([0.5, 0.9]), np.zeros(2), 0,
                          metrics=np.array([[0.99, 0.99, 0.99, 0.99], [1.0, 1.0, 1.0, 1.0]]))
    # equality is not dominance
    assert scan_needed(curve, np.ones(4), 0.99) == (20, True)
    assert scan_needed(curve, np.ones(4), 1.0) == (0, False)


def test_ground_truth_roundtrip(separable):
    gt = compute_ground_truth(separable, [10, 50, 100], 2, 0.99, FAST, seed=0)
    back = GroundTruth.from_dict(gt.to_dict())
    assert back.final_performance == gt.final_performance
    assert back.needed_amount == gt.needed_amount
    assert np.array_equal(back.reference_curve.s, gt.reference_curve.s)


def test_score_file_oracle(tmp_path, separable):
    path = tmp_path / "scores.json"
    path.write_text('{"sep": {"accuracy": 0.974, "f1_macro": 0.9731, "recall_macro": 0.9735, '
                    '"precision_macro": 0.9729}}')
    gt = compute_ground_truth(separable, [50, 100], 2, 0.99, FAST, seed=0, oracle=ScoreFileOracle(path))
    assert gt.final_performance == 0.9731
    # Need_D stays relative to the forest's own full-train vector
    assert gt.full_vector == compute_ground_truth(separable, [50, 100], 2, 0.99, FAST, seed=0).full_vector
    with pytest.raises(CurveError):
        other = type(separable)(separable.train, separable.test, "unknown")
        compute_ground_truth(other, [50], 1, 0.99, FAST, oracle=ScoreFileOracle(path))


def test_curve_csv_roundtrip(tmp_path):
    curve = LearningCurve(np.array([10, 11, 12]), np.array([0.5, 0.1 + 0.2, 1 / 3]),
                          np.array([0.01, 0.0, 0.2]), 22)
    path = tmp_path / "c.csv"
    save_curve(curve, path)
    assert path.read_text().splitlines()[0] == "x,s,stddev"
    back = LearningCurve.from_csv(path.read_text(), m=22)
    assert np.array_equal(back.s, curve.s) and np.array_equal(back.grid, curve.grid)


def test_split_comparison_separable(separable):
    pilot = draw_pilot(separable, 100, seed=1)
    final = final_performance(separable, FAST)
    cmp = split_comparison(pilot, separable, repetitions=10, params=FAST, seed=0, final=final)
    for v in (cmp.single_split, cmp.five_fold, cmp.multiple_split, cmp.full_test):
        assert abs(v - final) <= 0.05
    assert all(e >= 0 for e in cmp.error_rates.values())
    assert cmp.final_performance == final


def test_split_comparison_errors(separable):
    pilot = draw_pilot(separable, 20, seed=1)
    with pytest.raises(CurveError):
        split_comparison(pilot, separable, x=20, repetitions=2, params=FAST)
