import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from databudget.curves import LearningCurve
from databudget.powerlaw import (
    PowerLawError,
    PowerLawFit,
    extrapolate_final,
    extrapolate_needed,
    fit_power_law,
    needed_search,
)


def curve_from(s, grid):
    grid = np.asarray(grid)
    return LearningCurve(grid, np.asarray(s, dtype=float), np.zeros(len(grid)), int(grid[-1]) + 10)


def brute_force_needed(b, c, threshold=0.99, N=2500):
    """Independent scan: f evaluated directly, clamped, for every x in [1, N]."""
    f = lambda x: min(1.0, max(0.0, 1.0 - b * x ** c))
    target = threshold * f(N)
    for x in range(1, N + 1):
        if f(x) > target:
            return x
    return N


def test_recovers_generating_parameters():
    grid = np.arange(10, 91)
    fit = fit_power_law(curve_from(1 - 0.5 * grid ** -0.5, grid))
    assert fit.b == pytest.approx(0.5, abs=1e-6)
    assert fit.c == pytest.approx(-0.5, abs=1e-6)
    assert fit.rms_residual < 1e-9


def test_saturated_curve():
    fit = fit_power_law(curve_from(np.ones(9), np.arange(10, 19)))
    assert fit.b == 0.0
    assert extrapolate_final(fit) == 1.0


def test_flat_curve():
    fit = fit_power_law(curve_from(np.full(20, 0.7), np.arange(10, 30)))
    assert fit.b == pytest.approx(0.3, abs=1e-9)
    assert fit.c == pytest.approx(0.0, abs=1e-9)
    assert fit.rms_residual < 1e-9


def test_too_few_points():
    with pytest.raises(PowerLawError):
        fit_power_law(curve_from([0.5, 0.6], [10, 20]))


def test_final_fixture():
    # 1 - 0.5 / sqrt(2500) = 1 - 0.5 / 50
    assert extrapolate_final(PowerLawFit(0.5, -0.5, 0.0)) == pytest.approx(0.99, abs=1e-15)
    assert extrapolate_final(PowerLawFit(0.0, -0.5, 0.0)) == 1.0
    assert extrapolate_final(PowerLawFit(2.0, 0.0, 0.0)) == 0.0


def test_needed_fixture():
    fit = PowerLawFit(0.5, -0.5, 0.0)
    # target 0.9801: x > (0.5 / 0.0199)^2 = 631.3
    assert (0.5 / (1 - 0.99 * 0.99)) ** 2 == pytest.approx(631.3, abs=0.05)
    assert extrapolate_needed(fit, 0.99) == 632 == brute_force_needed(0.5, -0.5)
    assert needed_search(fit)[1] == "closed-form"


def test_needed_constant_one():
    assert extrapolate_needed(PowerLawFit(0.0, -0.3, 0.0)) == 1


def test_needed_non_improving_uses_scan():
    x, how = needed_search(PowerLawFit(0.2, 0.1, 0.0))
    assert how in ("scan", "unreached")
    assert x == brute_force_needed(0.2, 0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(-2.0, -0.01), st.sampled_from([0.9, 0.95, 0.99, 0.999]))
def test_closed_form_matches_scan(b, c, t):
    assert extrapolate_needed(PowerLawFit(b, c, 0.0), t) == brute_force_needed(b, c, t)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(-1.0, 0.0))
def test_final_monotone_in_b(b1, b2, c):
    lo, hi = sorted((b1, b2))
    assert extrapolate_final(PowerLawFit(hi, c, 0.0)) <= extrapolate_final(PowerLawFit(lo, c, 0.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(-1.0, 0.0), st.floats(-1.0, 0.0))
def test_final_monotone_in_c(b, c1, c2):
    # d/dc (1 - b N^c) = -b N^c ln N < 0 for N > 1: a steeper decay predicts more
    lo, hi = sorted((c1, c2))
    assert extrapolate_final(PowerLawFit(b, hi, 0.0)) <= extrapolate_final(PowerLawFit(b, lo, 0.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(-1.0, -0.1))
def test_fit_recovery_property(b, c):
    grid = np.arange(10, 91)
    fit = fit_power_law(curve_from(1 - b * grid.astype(float) ** c, grid))
    assert math.isclose(fit.b, b, abs_tol=1e-6) and math.isclose(fit.c, c, abs_tol=1e-6)
