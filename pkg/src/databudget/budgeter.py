"""Learning-based data budgeting.

A pilot curve is turned into a feature vector, and two meta-models are
fitted across a corpus of datasets: a regressor for the final performance
and a classifier over five needed-amount bins. In percent mode the
features are curve values at fixed fractions of the pilot size plus the
pilot size itself, and the bin label is the needed amount divided by the
pilot size.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .curves import GroundTruth, LearningCurve, default_pilot_grid
from .learners import (
    ForestModel,
    ForestParams,
    LinearModel,
    LogisticModel,
    fit_forest_classifier,
    fit_forest_regressor,
    fit_linear_regression,
    fit_logistic_regression,
    predict,
    r2_score,
)

MODEL_FORMAT = "databudget-model"
MODEL_VERSION = 1
N_BINS = 5
PERCENTS = tuple(range(10, 91, 5))
MODES = ("fixed", "percent")
KINDS = ("LR", "RF")
METHOD_NAMES = {"LR": "learning-LR", "RF": "learning-RF"}


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class BinScheme:
    """Five contiguous bins given by their inclusive upper bounds.

    ``fixed-count`` bins are integer intervals ``[prev + 1, upper]``;
    ``ratio`` bins are real intervals ``(prev, upper]``. The first bin
    starts at 0 and values above the last upper bound fall in the last bin.
    """

    uppers: tuple[float, ...]
    mode: str = "fixed-count"

    def __post_init__(self):
        if len(self.uppers) != N_BINS:
            raise BudgetError(f"a bin scheme has exactly {N_BINS} bins")
        if self.mode not in ("fixed-count", "ratio"):
            raise BudgetError(f"unknown bin mode {self.mode!r}")
        if self.uppers[0] < 0 or any(b <= a for a, b in zip(self.uppers, self.uppers[1:])):
            raise BudgetError("bin upper bounds must be non-negative and increasing")

    def interval(self, k: int) -> tuple[float, float]:
        lo = 0 if k == 0 else self.uppers[k - 1]
        if self.mode == "fixed-count" and k > 0:
            lo = lo + 1
        return lo, self.uppers[k]

    def midpoint(self, k: int) -> float:
        lo, hi = self.interval(k)
        if self.mode == "fixed-count":
            return (lo + hi) // 2
        return (lo + hi) / 2.0

    def label(self, k: int) -> str:
        lo, hi = self.interval(k)
        if self.mode == "fixed-count":
            return f"{int(lo)}-{int(hi)}"
        return f"({lo:g}, {hi:g}]" if k else f"[0, {hi:g}]"

    def to_dict(self) -> dict:
        return {"uppers": [float(u) for u in self.uppers], "mode": self.mode}

    @classmethod
    def from_dict(cls, data: dict) -> "BinScheme":
        uppers = data["uppers"]
        if data["mode"] == "fixed-count":
            uppers = [int(u) for u in uppers]
        return cls(tuple(uppers), data["mode"])


# the published edges, with the shared 430/805 endpoints assigned to the lower bin
PAPER_BINS = BinScheme((104, 227, 430, 805, 2000), "fixed-count")


def assign_bin(needed: float, scheme: BinScheme = PAPER_BINS) -> int:
    if needed < 0:
        raise BudgetError("needed amount must be non-negative")
    for k, upper in enumerate(scheme.uppers):
        if needed <= upper:
            return k
    return N_BINS - 1


def make_quantile_bins(needed_values, k: int = N_BINS, mode: str = "fixed-count") -> BinScheme:
    """Equal-frequency bins; on distinct values the counts differ by at most one."""
    if k != N_BINS:
        raise BudgetError(f"only {N_BINS}-bin schemes are supported")
    v = np.sort(np.asarray(needed_values, dtype=np.float64))
    if np.unique(v).size < k:
        raise BudgetError(f"need at least {k} distinct values for quantile bins")
    sizes = [len(chunk) for chunk in np.array_split(np.arange(v.size), k)]
    cuts = np.cumsum(sizes)
    uppers: list[float] = []
    for i, cut in enumerate(cuts):
        upper = v[-1] if i == k - 1 else v[cut - 1]
        if uppers and upper <= uppers[-1]:
            larger = v[v > uppers[-1]]
            upper = larger[0]
        uppers.append(float(upper))
    if any(b <= a for a, b in zip(uppers, uppers[1:])):
        raise BudgetError("values too concentrated for distinct quantile bins")
    if mode == "fixed-count":
        return BinScheme(tuple(int(u) for u in uppers), mode)
    return BinScheme(tuple(uppers), mode)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    mode: str
    # x values (fixed) or percents (percent) that produced ``values``
    positions: tuple[int, ...]
    m: int

    def __len__(self):
        return len(self.values)


def percent_positions(m: int) -> list[int]:
    return [p * m // 100 for p in PERCENTS]


def featurize(curve: LearningCurve, mode: str = "fixed", grid: Sequence[int] | None = None) -> FeatureVector:
    """Curve values at the canonical grid (fixed) or at floor(p% * m) (percent).

    Percent mode appends the pilot size as the last feature.
    """
    if mode not in MODES:
        raise BudgetError(f"unknown feature mode {mode!r}")
    lookup = {int(x): float(s) for x, s in zip(curve.grid, curve.s)}
    if mode == "fixed":
        xs = list(default_pilot_grid(curve.m) if grid is None else grid)
        missing = [x for x in xs if x not in lookup]
        if missing:
            raise BudgetError(f"curve has no value at x={missing[0]}")
        return FeatureVector(np.array([lookup[x] for x in xs]), mode, tuple(int(x) for x in xs), curve.m)
    xs = percent_positions(curve.m)
    missing = [x for x in xs if x not in lookup]
    if missing:
        raise BudgetError(f"curve has no value at x={missing[0]} (m={curve.m})")
    values = np.array([lookup[x] for x in xs] + [float(curve.m)])
    return FeatureVector(values, mode, PERCENTS, curve.m)


def percent_grid(m: int) -> list[int]:
    """Sorted curve grid that covers every percent-mode position for pilot size m."""
    return sorted(set(percent_positions(m)))


def needed_label(gt: GroundTruth, fv: FeatureVector) -> float:
    return gt.needed_amount / fv.m if fv.mode == "percent" else gt.needed_amount


@dataclass(frozen=True)
class ConstantClassifier:
    label: int

    def predict(self, F) -> np.ndarray:
        return np.full(np.atleast_2d(F).shape[0], self.label, dtype=np.int64)

    def to_dict(self) -> dict:
        return {"kind": "constant", "label": self.label}


def _model_to_dict(model) -> dict:
    return model.to_dict()


def _model_from_dict(data: dict):
    kind = data["kind"]
    if kind == "linear":
        return LinearModel.from_dict(data)
    if kind == "logistic":
        return LogisticModel.from_dict(data)
    if kind == "constant":
        return ConstantClassifier(int(data["label"]))
    if kind.startswith("forest"):
        return ForestModel.from_dict(data)
    raise BudgetError(f"unknown model kind {kind!r}")


def _predict_with(model, F) -> np.ndarray:
    if isinstance(model, ForestModel):
        return predict(model, F)
    return model.predict(F)


@dataclass(frozen=True)
class BudgetModel:
    final_model: LinearModel | ForestModel
    needed_model: LogisticModel | ForestModel | ConstantClassifier
    kind: str
    mode: str
    scheme: BinScheme
    positions: tuple[int, ...]
    selected: tuple[int, ...] | None = None
    settings: dict = field(default_factory=dict)

    @property
    def method(self) -> str:
        return METHOD_NAMES[self.kind]

    @property
    def n_features(self) -> int:
        return len(self.positions) + (1 if self.mode == "percent" else 0)

    def design(self, features: Sequence[FeatureVector]) -> np.ndarray:
        for fv in features:
            if fv.mode != self.mode:
                raise BudgetError(f"model expects {self.mode}-mode features, got {fv.mode}")
            if tuple(fv.positions) != self.positions:
                raise BudgetError("feature positions differ from the ones the model was trained on")
        F = np.array([fv.values for fv in features], dtype=np.float64)
        if self.selected is not None:
            F = F[:, list(self.selected)]
        return F

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "mode": self.mode,
            "scheme": self.scheme.to_dict(),
            "positions": list(self.positions),
            "selected": None if self.selected is None else list(self.selected),
            "settings": self.settings,
            "final_model": _model_to_dict(self.final_model),
            "needed_model": _model_to_dict(self.needed_model),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BudgetModel":
        if data.get("format") != MODEL_FORMAT or data.get("version") != MODEL_VERSION:
            raise BudgetError("not a supported budget model file")
        return cls(
            final_model=_model_from_dict(data["final_model"]),
            needed_model=_model_from_dict(data["needed_model"]),
            kind=data["kind"],
            mode=data["mode"],
            scheme=BinScheme.from_dict(data["scheme"]),
            positions=tuple(int(p) for p in data["positions"]),
            selected=None if data["selected"] is None else tuple(data["selected"]),
            settings=data.get("settings", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:16]

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BudgetModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_scheme(corpus: Sequence[tuple[FeatureVector, GroundTruth]], mode: str) -> BinScheme:
    if mode == "fixed":
        return PAPER_BINS
    return make_quantile_bins([needed_label(gt, fv) for fv, gt in corpus], mode="ratio")


def train_budget_model(corpus: Sequence[tuple[FeatureVector, GroundTruth]], model_kind: str = "LR",
                       scheme: BinScheme | None = None, seed: int = 0, ridge: float = 1e-2,
                       l2: float = 1e-4, iters: int = 500,
                       forest: ForestParams | None = None,
                       selected: Sequence[int] | None = None,
                       min_corpus: int = 10) -> BudgetModel:
    """Fit the final-performance regressor and the needed-amount bin classifier."""
    if model_kind not in KINDS:
        raise BudgetError(f"model kind must be one of {KINDS}")
    if not corpus:
        raise BudgetError("empty corpus")
    if len(corpus) < min_corpus:
        raise BudgetError(f"need at least {min_corpus} corpus entries, got {len(corpus)}")
    modes = {fv.mode for fv, _ in corpus}
    if len(modes) != 1:
        raise BudgetError("corpus mixes feature modes")
    mode = modes.pop()
    positions = {tuple(fv.positions) for fv, _ in corpus}
    if len(positions) != 1:
        raise BudgetError("corpus feature vectors have different positions")
    positions = positions.pop()

    if scheme is None:
        scheme = default_scheme(corpus, mode)
    skeleton = BudgetModel(None, None, model_kind, mode, scheme, positions,
                           None if selected is None else tuple(int(i) for i in selected))
    F = skeleton.design([fv for fv, _ in corpus])
    y_final = np.array([gt.final_performance for _, gt in corpus])
    y_bin = np.array([assign_bin(needed_label(gt, fv), scheme) for fv, gt in corpus], dtype=np.int64)

    settings = {"seed": seed}
    if model_kind == "LR":
        final_model = fit_linear_regression(F, y_final, ridge=ridge)
        if np.unique(y_bin).size < 2:
            needed_model = ConstantClassifier(int(y_bin[0]))
        else:
            needed_model = fit_logistic_regression(F, y_bin, l2=l2, iters=iters, n_classes=N_BINS)
        settings.update(ridge=ridge, l2=l2, iters=iters)
    else:
        params = (forest or ForestParams()).with_seed(seed)
        final_model = fit_forest_regressor(F, y_final, params)
        if np.unique(y_bin).size < 2:
            needed_model = ConstantClassifier(int(y_bin[0]))
        else:
            needed_model = fit_forest_classifier(F, y_bin, params, n_classes=N_BINS)
        settings.update(forest=params.to_dict())

    return BudgetModel(final_model, needed_model, model_kind, mode, scheme, positions,
                       skeleton.selected, settings)


@dataclass(frozen=True)
class BudgetReport:
    predicted_final: float
    predicted_bin: int
    bin_interval: tuple[float, float]
    method: str
    inputs: dict = field(default_factory=dict)
    fingerprint: str = ""
    predicted_ratio_bin: bool = False

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "predicted_final": self.predicted_final,
            "predicted_bin": self.predicted_bin,
            "bin_interval": list(self.bin_interval),
            "bin_is_ratio": self.predicted_ratio_bin,
            "model_fingerprint": self.fingerprint,
            "inputs": self.inputs,
        }

    def summary(self) -> str:
        lo, hi = self.bin_interval
        unit = "x pilot size" if self.predicted_ratio_bin else "rows"
        return (f"[{self.method}] final performance ~ {self.predicted_final:.4f}; "
                f"needed amount in bin {self.predicted_bin} ({lo:g}-{hi:g} {unit})")


def predict_features(model: BudgetModel, features: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    """Raw (unclamped) final predictions and bin predictions for many vectors."""
    F = model.design(features)
    return _predict_with(model.final_model, F), _predict_with(model.needed_model, F)


def predict_budget(model: BudgetModel, curve: LearningCurve) -> BudgetReport:
    fv = featurize(curve, model.mode, model.positions if model.mode == "fixed" else None)
    final, bins = predict_features(model, [fv])
    k = int(bins[0])
    return BudgetReport(
        predicted_final=float(min(1.0, max(0.0, final[0]))),
        predicted_bin=k,
        bin_interval=model.scheme.interval(k),
        method=model.method,
        inputs={"m": curve.m, "mode": model.mode, "n_features": len(fv)},
        fingerprint=model.fingerprint(),
        predicted_ratio_bin=model.mode == "percent",
    )


@dataclass(frozen=True)
class OnePointResult:
    x: int
    r2: float
    cv_r2: float | None = None


def _one_feature_fit(s, y) -> LinearModel:
    try:
        return fit_linear_regression(s, y)
    except ValueError:
        # s_x constant over the corpus: best fit is the mean
        return LinearModel(np.zeros(1), float(y.mean()))


def one_point_analysis(corpus: Sequence[tuple[LearningCurve, GroundTruth]], x: int,
                       cv_folds: int | None = None, seed: int = 0) -> OnePointResult:
    """R² of ``O_D ~ k * s_x + b`` across the corpus (held-in, optionally k-fold)."""
    missing = [i for i, (c, _) in enumerate(corpus) if not c.has(x)]
    if missing:
        raise BudgetError(f"corpus entry {missing[0]} has no s_{x}")
    s = np.array([[c.value_at(x)] for c, _ in corpus])
    y = np.array([gt.final_performance for _, gt in corpus])
    r2 = r2_score(y, _one_feature_fit(s, y).predict(s))
    cv = None
    if cv_folds:
        order = np.random.default_rng(seed).permutation(len(y))
        pred = np.empty_like(y)
        for test in np.array_split(order, cv_folds):
            train = np.setdiff1d(order, test)
            pred[test] = _one_feature_fit(s[train], y[train]).predict(s[test])
        cv = r2_score(y, pred)
    return OnePointResult(x, r2, cv)


def select_top_coefficients(model: BudgetModel, k: int = 5) -> list[int]:
    """Feature positions of the k largest |weight| of the linear final model.

    Ties go to the lower index. Indices refer to the full feature vector.
    """
    if not isinstance(model.final_model, LinearModel):
        raise BudgetError("top-coefficient selection needs a linear final model")
    w = np.abs(model.final_model.weights)
    if k > w.size:
        raise BudgetError(f"k={k} exceeds the {w.size} available features")
    order = np.argsort(-w, kind="stable")[:k]
    cols = list(model.selected) if model.selected is not None else list(range(w.size))
    return [int(cols[i]) for i in order]


def coefficient_profile(model: BudgetModel) -> np.ndarray:
    """Per-bin logistic coefficients, shape (5, n_features)."""
    if not isinstance(model.needed_model, LogisticModel):
        raise BudgetError("coefficient profile needs a logistic needed-amount model")
    return model.needed_model.weights.copy()
