import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from databudget.learners import (
    ForestModel,
    ForestParams,
    Tree,
    fit_forest_classifier,
    fit_forest_regressor,
    fit_linear_regression,
    fit_logistic_regression,
    fit_predict,
    metric_vector,
    predict,
    r2_score,
    train_forest,
)


def one_dim(n=50, seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-1, -0.05, n // 2), rng.uniform(0.05, 1, n - n // 2)])
    return x[:, None], (x > 0).astype(int)


def test_forest_learns_threshold():
    X, y = one_dim(50)
    Xp, yp = one_dim(200, seed=1)
    model = train_forest(X, y, ForestParams(seed=3))
    assert np.mean(predict(model, Xp) == yp) == 1.0


def test_forest_single_class():
    X = np.random.default_rng(0).normal(size=(30, 3))
    y = np.full(30, 2)
    model = train_forest(X, y, ForestParams(n_trees=10), n_classes=3)
    assert set(predict(model, np.random.default_rng(1).normal(size=(20, 3)))) == {2}


def test_forest_deterministic():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 4))
    y = (X[:, 0] + rng.normal(size=80) > 0).astype(int)
    probe = rng.normal(size=(40, 4))
    a = predict(train_forest(X, y, ForestParams(n_trees=15, seed=9)), probe)
    b = predict(train_forest(X, y, ForestParams(n_trees=15, seed=9)), probe)
    assert np.array_equal(a, b)


def test_fit_predict_matches_model_path():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 5))
    y = rng.integers(0, 3, size=60)
    probe = rng.normal(size=(50, 5))
    params = ForestParams(n_trees=12, seed=77)
    assert np.array_equal(fit_predict(X, y, probe, 3, params), predict(train_forest(X, y, params, 3), probe))


def stump(label, n_classes=2):
    value = np.zeros((1, n_classes))
    value[0, label] = 1.0
    return Tree(np.array([-1]), np.zeros(1), np.array([-1]), np.array([-1]), value)


@pytest.mark.parametrize("zeros,ones,expected", [(50, 50, 0), (10, 90, 1)])
def test_vote_tally(zeros, ones, expected):
    model = ForestModel([stump(0)] * zeros + [stump(1)] * ones, n_classes=2, n_features=1)
    assert predict(model, np.zeros((1, 1))).tolist() == [expected]


def test_predict_empty_and_mismatch():
    X, y = one_dim(20)
    model = train_forest(X, y, ForestParams(n_trees=3))
    assert predict(model, np.empty((0, 1))).size == 0
    with pytest.raises(ValueError):
        predict(model, np.zeros((2, 3)))


def test_train_forest_empty():
    with pytest.raises(ValueError):
        train_forest(np.empty((0, 2)), np.empty(0, dtype=int))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["exp", "cube", "affine"]))
def test_monotone_transform_invariance(seed, kind):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] * X[:, 1] + 0.3 * rng.normal(size=60) > 0).astype(int)
    g = {"exp": np.exp, "cube": lambda v: v ** 3, "affine": lambda v: 3 * v - 7}[kind]
    X2 = X.copy()
    X2[:, 1] = g(X[:, 1])
    params = ForestParams(n_trees=8, seed=seed)
    # same splits on the same rows; only the threshold values move. Predictions
    # are not compared: an out-of-bag row between two in-bag values can fall on
    # either side of a midpoint once the feature is transformed.
    for ta, tb in zip(train_forest(X, y, params).trees, train_forest(X2, y, params).trees):
        assert np.array_equal(ta.feature, tb.feature)
        assert np.array_equal(ta.left, tb.left) and np.array_equal(ta.right, tb.right)
        assert np.array_equal(ta.value, tb.value)
        other = (ta.left >= 0) & (ta.feature != 1)
        assert np.array_equal(ta.threshold[other], tb.threshold[other])


def test_forest_serialisation_roundtrip():
    X, y = one_dim(40)
    model = train_forest(X, y, ForestParams(n_trees=4, seed=2))
    back = ForestModel.from_dict(model.to_dict())
    probe = np.linspace(-1, 1, 33)[:, None]
    assert np.array_equal(predict(model, probe), predict(back, probe))


def test_regressor_constant():
    X = np.random.default_rng(0).normal(size=(40, 2))
    model = fit_forest_regressor(X, np.full(40, 0.37), ForestParams(n_trees=10))
    assert np.all(predict(model, X) == 0.37)


def test_regressor_identity():
    x = np.linspace(0, 10, 100)
    model = fit_forest_regressor(x[:, None], x, ForestParams(seed=1))
    mae = np.mean(np.abs(predict(model, x[:, None]) - x))
    assert mae < 0.1 * 10


def test_classifier_one_class():
    X = np.random.default_rng(0).normal(size=(20, 2))
    model = fit_forest_classifier(X, np.zeros(20, dtype=int), ForestParams(n_trees=5))
    assert set(predict(model, X)) == {0}


def test_metric_perfect():
    mv = metric_vector([0, 1, 0, 1], [0, 1, 0, 1])
    assert mv.as_array().tolist() == [1.0, 1.0, 1.0, 1.0]


def test_metric_hand_computed():
    # confusion: class0 tp=2 fp=2 fn=0 -> P=1/2 R=1 F1=2/3; class1 tp=0 -> 0
    mv = metric_vector([0, 0, 1, 1], [0, 0, 0, 0])
    assert mv.accuracy == 0.5
    assert mv.f1_macro == pytest.approx(1 / 3, abs=1e-15)
    assert mv.recall_macro == 0.5
    assert mv.precision_macro == 0.25


def test_metric_total_miss():
    assert metric_vector([0, 1], [1, 0]).as_array().tolist() == [0.0, 0.0, 0.0, 0.0]


def test_metric_one_class_perfect():
    assert metric_vector([2, 2, 2], [2, 2, 2]).as_array().tolist() == [1.0] * 4


def test_metric_errors():
    with pytest.raises(ValueError):
        metric_vector([0, 1], [0])
    with pytest.raises(ValueError):
        metric_vector([], [])


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_binary_macro_recall_is_balanced_accuracy(pairs):
    t = np.array([p[0] for p in pairs])
    p = np.array([p[1] for p in pairs])
    classes = sorted(set(t) | set(p))
    recalls = [np.mean(p[t == c] == c) if np.any(t == c) else 0.0 for c in classes]
    assert metric_vector(t, p).recall_macro == pytest.approx(np.mean(recalls), abs=1e-12)


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=40))
def test_metric_components_in_unit_interval(pairs):
    mv = metric_vector([a for a, _ in pairs], [b for _, b in pairs]).as_array()
    assert np.all((mv >= 0) & (mv <= 1))


def test_linear_exact():
    model = fit_linear_regression([[1], [2], [3]], [2, 4, 6], ridge=0)
    assert model.weights[0] == pytest.approx(2, abs=1e-9)
    assert model.bias == pytest.approx(0, abs=1e-9)


def test_linear_constant_target():
    F = np.random.default_rng(0).normal(size=(10, 3))
    model = fit_linear_regression(F, np.full(10, 4.2), ridge=0)
    assert np.allclose(model.weights, 0, atol=1e-12)
    assert model.bias == pytest.approx(4.2)


def test_linear_duplicated_columns():
    rng = np.random.default_rng(1)
    x = rng.normal(size=20)
    F = np.column_stack([x, x])
    y = 3 * x + 1
    model = fit_linear_regression(F, y, ridge=1e-6)
    assert np.all(np.isfinite(model.weights))
    assert np.max(np.abs(model.predict(F) - y)) < 1e-5
    with pytest.raises(ValueError, match="degenerate"):
        fit_linear_regression(F, y, ridge=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_linear_reproduces_exact_targets(seed):
    rng = np.random.default_rng(seed)
    F = rng.uniform(-1, 1, size=(12, 4))
    y = F @ rng.normal(size=4) + rng.normal()
    assert np.max(np.abs(fit_linear_regression(F, y).predict(F) - y)) < 1e-9


def test_logistic_separable():
    x = np.linspace(-1, 1, 40)
    x = x[x != 0]
    y = (x > 0).astype(int)
    model = fit_logistic_regression(x[:, None], y)
    assert np.mean(model.predict(x[:, None]) == y) == 1.0


def test_logistic_constant_feature_majority():
    F = np.ones((10, 1))
    y = np.array([0, 1, 1, 2, 1, 1, 0, 2, 1, 1])
    model = fit_logistic_regression(F, y)
    # the intercept-only optimum is log class frequency; its argmax is the mode
    assert np.argmax(np.log(np.bincount(y))) == 1
    assert set(model.predict(np.array([[1.0], [5.0], [-3.0]]))) == {1}


def test_logistic_deterministic_and_errors():
    rng = np.random.default_rng(0)
    F = rng.normal(size=(30, 3))
    y = rng.integers(0, 3, size=30)
    a = fit_logistic_regression(F, y)
    b = fit_logistic_regression(F, y)
    assert np.array_equal(a.weights, b.weights) and np.array_equal(a.biases, b.biases)
    with pytest.raises(ValueError):
        fit_logistic_regression(F, np.zeros(30, dtype=int))


@pytest.mark.parametrize("y_true,y_pred,expected", [
    ([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 1.0),
    ([1.0, 2.0, 3.0], [2.0, 2.0, 2.0], 0.0),
    ([0.0, 1.0, 2.0], [0.0, 1.0, 1.0], 0.5),
])
def test_r2(y_true, y_pred, expected):
    assert r2_score(y_true, y_pred) == expected


def test_r2_zero_variance():
    assert r2_score([1.0, 1.0], [1.0, 1.0]) == 1.0
    assert r2_score([1.0, 1.0], [1.0, 2.0]) == float("-inf")
    with pytest.raises(ValueError):
        r2_score([1.0, 2.0], [1.0])
