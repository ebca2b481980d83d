"""Dataset-independent baseline: a saturating power law ``f(x) = 1 - b * x**c``.

The fit starts from the exact log-space solution of
``log(1 - s) = log b + c log x`` and is then polished by a bounded
Levenberg-Marquardt run on the plain squared error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import DEFAULT_THRESHOLD, LearningCurve

HORIZON = 2500
SATURATION_EPS = 1e-6
REFINE_ITERS = 200


class PowerLawError(ValueError):
    pass


@dataclass(frozen=True)
class PowerLawFit:
    b: float
    c: float
    rms_residual: float
    horizon: int = HORIZON

    def __post_init__(self):
        if self.b < 0:
            raise PowerLawError("b must be non-negative")

    def raw(self, x: float) -> float:
        return 1.0 - self.b * float(x) ** self.c

    def value(self, x: float) -> float:
        return min(1.0, max(0.0, self.raw(x)))

    def to_dict(self) -> dict:
        needed, how = needed_search(self)
        return {
            "b": self.b,
            "c": self.c,
            "rms_residual": self.rms_residual,
            "horizon": self.horizon,
            "final_prediction": extrapolate_final(self),
            "needed_prediction": needed,
            "needed_method": how,
        }


def _loss(b, c, x, s):
    r = 1.0 - b * x ** c - s
    return float(r @ r)


def _refine(b, c, x, s):
    lam = 1e-3
    loss = _loss(b, c, x, s)
    for _ in range(REFINE_ITERS):
        xc = x ** c
        r = 1.0 - b * xc - s
        J = np.column_stack([-xc, -b * xc * np.log(x)])
        A = J.T @ J
        g = J.T @ r
        step = np.linalg.solve(A + lam * np.diag(np.diag(A) + 1e-12), -g)
        b_new = max(0.0, b + step[0])
        c_new = c + step[1]
        new_loss = _loss(b_new, c_new, x, s)
        if np.isfinite(new_loss) and new_loss < loss:
            shrink = loss - new_loss
            b, c, loss = b_new, c_new, new_loss
            lam = max(lam / 10.0, 1e-12)
            if shrink <= 1e-15 * max(loss, 1e-300):
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                break
    return b, c


def fit_power_law(curve: LearningCurve, horizon: int = HORIZON) -> PowerLawFit:
    x = np.asarray(curve.grid, dtype=np.float64)
    s = np.asarray(curve.s, dtype=np.float64)
    if x.size < 3:
        raise PowerLawError("need at least 3 curve points")
    if np.any(x <= 0):
        raise PowerLawError("train sizes must be positive")

    usable = s < 1.0 - SATURATION_EPS
    if not usable.any():
        return PowerLawFit(0.0, 0.0, float(np.sqrt(np.mean((1.0 - s) ** 2))), horizon)

    if usable.sum() >= 2:
        lx = np.log(x[usable])
        ly = np.log(1.0 - s[usable])
        A = np.column_stack([np.ones_like(lx), lx])
        (log_b, c), *_ = np.linalg.lstsq(A, ly, rcond=None)
        b = math.exp(log_b)
    else:
        # a lone unsaturated point: start from a flat curve
        b, c = float(np.mean(1.0 - s)), 0.0

    b, c = _refine(b, float(c), x, s)
    rms = math.sqrt(_loss(b, c, x, s) / x.size)
    return PowerLawFit(float(b), float(c), rms, horizon)


def extrapolate_final(fit: PowerLawFit) -> float:
    return fit.value(fit.horizon)


def needed_search(fit: PowerLawFit, threshold: float = DEFAULT_THRESHOLD) -> tuple[int, str]:
    """Smallest integer x in [1, N] with f(x) > threshold * f(N).

    Returns the size and how it was found: ``"closed-form"``, ``"scan"`` or
    ``"unreached"`` (condition never holds; size is N).
    """
    N = fit.horizon
    target = threshold * fit.value(N)

    def ok(x: int) -> bool:
        return fit.value(x) > target

    if fit.b > 0 and fit.c < 0:
        # f is increasing; invert 1 - b x^c = target
        x_star = ((1.0 - target) / fit.b) ** (1.0 / fit.c)
        cand = int(min(max(math.floor(x_star) + 1, 1), N + 1)) if math.isfinite(x_star) else N + 1
        while cand > 1 and ok(cand - 1):
            cand -= 1
        while cand <= N and not ok(cand):
            cand += 1
        if cand > N:
            return N, "unreached"
        return cand, "closed-form"

    for x in range(1, N + 1):
        if ok(x):
            return x, "scan"
    return N, "unreached"


def extrapolate_needed(fit: PowerLawFit, threshold: float = DEFAULT_THRESHOLD) -> int:
    return needed_search(fit, threshold)[0]
