"""Random forest classifier and regressor built on the compiled CART core."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _cart


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    # "sqrt" -> ceil(sqrt(d)), "all" -> d, or an explicit count
    features_per_split: str | int = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative or None")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def resolve_features(self, d: int) -> int:
        if self.features_per_split == "sqrt":
            k = math.ceil(math.sqrt(d))
        elif self.features_per_split == "all":
            k = d
        else:
            k = int(self.features_per_split)
        return max(1, min(d, k))

    def with_seed(self, seed: int) -> "ForestParams":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForestParams":
        return cls(**data)


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return _cart.apply_tree(self.feature, self.threshold, self.left, self.right, X)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(t).hex() for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": [[float(v).hex() for v in row] for row in self.value],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Tree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.array([float.fromhex(t) for t in data["threshold"]], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.array([[float.fromhex(v) for v in row] for row in data["value"]],
                           dtype=np.float64),
        )


@dataclass(frozen=True)
class ForestModel:
    """Fitted forest. ``n_classes`` is 0 for a regressor."""

    trees: list[Tree]
    n_classes: int
    n_features: int
    params: ForestParams = field(default_factory=ForestParams)

    @property
    def is_regressor(self) -> bool:
        return self.n_classes == 0

    def to_dict(self) -> dict:
        return {
            "kind": "forest-regressor" if self.is_regressor else "forest-classifier",
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "params": self.params.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForestModel":
        return cls(
            trees=[Tree.from_dict(t) for t in data["trees"]],
            n_classes=int(data["n_classes"]),
            n_features=int(data["n_features"]),
            params=ForestParams.from_dict(data["params"]),
        )


def _as_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    return X


def _grow(X, y, n_outputs, regression, params):
    n, d = X.shape
    max_depth = -1 if params.max_depth is None else params.max_depth
    k = params.resolve_features(d)
    trees = []
    for t in range(params.n_trees):
        arrays = _cart.build_tree(X, y, n_outputs, regression, True, k, max_depth,
                                  params.min_samples_split, params.seed + t)
        trees.append(Tree(*arrays))
    return trees


def train_forest(X, y, params: ForestParams = ForestParams(), n_classes: int | None = None) -> ForestModel:
    """Fit a bootstrap forest of Gini CART trees.

    Labels must be integer class ids. ``n_classes`` defaults to ``max(y) + 1``.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot train on empty input")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y have different lengths")
    if y.min() < 0:
        raise ValueError("class ids must be non-negative")
    C = int(y.max()) + 1 if n_classes is None else int(n_classes)
    trees = _grow(X, y.astype(np.float64), C, False, params)
    return ForestModel(trees=trees, n_classes=C, n_features=X.shape[1], params=params)


fit_forest_classifier = train_forest


def fit_forest_regressor(X, y, params: ForestParams = ForestParams()) -> ForestModel:
    """Fit a bootstrap forest of variance-reduction regression trees."""
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot train on empty input")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y have different lengths")
    trees = _grow(X, y, 1, True, params)
    return ForestModel(trees=trees, n_classes=0, n_features=X.shape[1], params=params)


def vote_counts(model: ForestModel, X) -> np.ndarray:
    """Per-row tally of tree votes, shape (n, C)."""
    X = _as_matrix(X)
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for tree in model.trees:
        labels = _cart.leaf_argmax(tree.value)[tree.apply(X)]
        np.add.at(votes, (rows, labels), 1)
    return votes


def predict(model: ForestModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0 and (X.ndim < 2 or X.shape[0] == 0):
        return np.empty(0, dtype=np.float64 if model.is_regressor else np.int64)
    X = _as_matrix(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features, got {X.shape[1]}")
    if model.is_regressor:
        leaf = np.stack([tree.value[tree.apply(X), 0] for tree in model.trees], axis=1)
        out = leaf.sum(axis=1) / leaf.shape[1]
        # unanimous trees give their shared value exactly, free of rounding
        same = leaf.min(axis=1) == leaf.max(axis=1)
        out[same] = leaf[same, 0]
        return out
    # argmax returns the first maximum: ties go to the lowest class id
    return np.argmax(vote_counts(model, X), axis=1).astype(np.int64)


def fit_predict(X, y, X_probe, n_classes: int, params: ForestParams) -> np.ndarray:
    """Train a classifier and predict in one compiled call.

    Produces exactly ``predict(train_forest(X, y, params, n_classes), X_probe)``
    without materialising the model.
    """
    X = _as_matrix(X)
    X_probe = _as_matrix(X_probe)
    max_depth = -1 if params.max_depth is None else params.max_depth
    return _cart.fit_predict_classifier(
        X, np.asarray(y, dtype=np.float64), X_probe, int(n_classes), params.n_trees,
        params.resolve_features(X.shape[1]), max_depth, params.min_samples_split, params.seed)
