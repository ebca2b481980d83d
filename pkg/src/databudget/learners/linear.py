"""Ridge linear regression and multinomial logistic regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float

    def predict(self, F) -> np.ndarray:
        F = np.atleast_2d(np.asarray(F, dtype=np.float64))
        if F.shape[1] != self.weights.shape[0]:
            raise ValueError(f"expected {self.weights.shape[0]} features, got {F.shape[1]}")
        # row-wise sums keep a single row bit-identical to the same row in a batch
        return (F * self.weights).sum(axis=1) + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "weights": [float(w).hex() for w in self.weights],
            "bias": float(self.bias).hex(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearModel":
        return cls(
            weights=np.array([float.fromhex(w) for w in data["weights"]]),
            bias=float.fromhex(data["bias"]),
        )


@dataclass(frozen=True)
class LogisticModel:
    """Multinomial logistic model; ``weights`` has shape (C, d)."""

    weights: np.ndarray
    biases: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    def logits(self, F) -> np.ndarray:
        F = np.atleast_2d(np.asarray(F, dtype=np.float64))
        if F.shape[1] != self.weights.shape[1]:
            raise ValueError(f"expected {self.weights.shape[1]} features, got {F.shape[1]}")
        return (F[:, None, :] * self.weights[None, :, :]).sum(axis=2) + self.biases

    def predict(self, F) -> np.ndarray:
        return np.argmax(self.logits(F), axis=1).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": "logistic",
            "weights": [[float(w).hex() for w in row] for row in self.weights],
            "biases": [float(b).hex() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticModel":
        return cls(
            weights=np.array([[float.fromhex(w) for w in row] for row in data["weights"]]),
            biases=np.array([float.fromhex(b) for b in data["biases"]]),
        )


def fit_linear_regression(F, y, ridge: float = 0.0) -> LinearModel:
    """Least squares with an L2 penalty on the weights (bias unpenalised).

    Solved exactly through the centred normal equations.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if F.shape[0] != y.shape[0]:
        raise ValueError("F and y have different lengths")
    if F.shape[0] < 2:
        raise ValueError("need at least 2 rows")

    f_mean = F.mean(axis=0)
    y_mean = y.mean()
    Fc = F - f_mean
    gram = Fc.T @ Fc + ridge * np.eye(F.shape[1])
    if np.linalg.matrix_rank(gram) < F.shape[1]:
        raise ValueError("degenerate system: design is rank deficient, use ridge > 0")
    weights = np.linalg.solve(gram, Fc.T @ (y - y_mean))
    bias = float(y_mean - f_mean @ weights)
    return LinearModel(weights=weights, bias=bias)


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def fit_logistic_regression(F, y, l2: float = 1e-4, iters: int = 500, step: float = 0.1,
                            n_classes: int | None = None) -> LogisticModel:
    """Full-batch gradient descent on the penalised multinomial likelihood.

    Features are standardised for the descent and the weights mapped back,
    so the returned model acts on raw features. Starts from zero weights.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if F.shape[0] != y.shape[0]:
        raise ValueError("F and y have different lengths")
    if np.unique(y).size < 2:
        raise ValueError("logistic regression needs at least 2 classes")
    C = int(y.max()) + 1 if n_classes is None else int(n_classes)
    n, d = F.shape

    mean = F.mean(axis=0)
    scale = F.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (F - mean) / scale
    Y = np.zeros((n, C))
    Y[np.arange(n), y] = 1.0

    W = np.zeros((C, d))
    b = np.zeros(C)
    for _ in range(iters):
        G = _softmax(Z @ W.T + b) - Y
        W -= step * (G.T @ Z / n + l2 * W)
        b -= step * G.mean(axis=0)

    weights = W / scale
    biases = b - weights @ mean
    return LogisticModel(weights=weights, biases=biases)
