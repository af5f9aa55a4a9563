"""Tests for high-order moment and signed-root summaries."""

import math
import warnings

import numpy as np
import pytest

from tailica.errors import DataError, TieWarning
from tailica.moments import extremes, log_moment, moment, root_moment


# Frozen reference values.  Each constant was computed through a route
# independent of the library: exact rational arithmetic where the inputs
# are small integers, and 60-digit arbitrary precision otherwise.
MOMENT_3_1_2_P3 = 11.333333333333334           # 34/3
ROOT_1_M2_HALF_P100 = 1.9781480083443415       # (sum/3)^(1/100)
ROOT_1_M2_HALF_P99 = -1.9779285035834093       # sign from the -2 extreme
ROOT_1E6_P128 = 994599.4234836332              # far outside naive float range
ROOT_1E300_P10 = 9.330329915368075e+299        # 1e3000 overflows long before this
ROOT_TIE_2_M2_1_P3 = 1.7828270804131212        # (17/3)^(1/3), tie resolved by magnitude
ROOT_M5_1_2_P3 = -3.381522214656514            # -(116/3)^(1/3)
LOG_MOMENT_3_1_K2 = 3.713572066704308          # ln(41)
LOG_MOMENT_HUGE_K5 = 6907.062131801677         # ln((1e3000 + 1e2990)/2)
LOG_MOMENT_MIX_K50 = 1379.9416178839933        # five-point panel, order 100


def test_moment_small_integer_case():
    assert moment([3.0, -1.0, 2.0], 3) == MOMENT_3_1_2_P3


def test_moment_matches_direct_mean_in_range():
    rng = np.random.default_rng(7)
    x = rng.standard_t(df=4, size=400)
    for p in (2, 3, 6, 11):
        assert moment(x, p) == np.mean(x**p)


def test_moment_overflow_saturates_to_inf():
    # 1e300**10 is far beyond the float range and there is no cancellation
    # to rescue, so the mean itself is infinite.
    assert moment([1e300, 1.0], 10) == math.inf


def test_moment_extreme_order_unit_scale():
    assert moment([1.0, -1.0], 2000) == 1.0


def test_moment_underflow_rescued_by_scaling():
    # 0.5**2000 underflows to zero in direct arithmetic; the scaled path
    # must still report the exact mean of {1, 0.5**2000} ~ 0.5.
    assert moment([1.0, 0.5], 2000) == 0.5


def test_moment_all_zero_sample():
    assert moment([0.0, 0.0, 0.0], 5) == 0.0


def test_root_moment_even_order():
    assert root_moment([1.0, -2.0, 0.5], 100) == ROOT_1_M2_HALF_P100


def test_root_moment_odd_order_negative_extreme():
    assert root_moment([1.0, -2.0, 0.5], 99) == ROOT_1_M2_HALF_P99


def test_root_moment_large_scale():
    assert root_moment([1e6, 2.0], 128) == ROOT_1E6_P128


def test_root_moment_near_float_limit():
    assert root_moment([1e300, 1.0], 10) == ROOT_1E300_P10


def test_root_moment_odd_tie_warns_and_uses_magnitude():
    with pytest.warns(TieWarning):
        got = root_moment([2.0, -2.0, 1.0], 3)
    assert got == ROOT_TIE_2_M2_1_P3


def test_root_moment_odd_negative_dominant():
    assert root_moment([-5.0, 1.0, 2.0], 3) == pytest.approx(
        ROOT_M5_1_2_P3, rel=1e-15
    )


def test_root_moment_odd_exact_cancellation():
    # Equal-magnitude opposite extremes at odd order: the signed mean is
    # zero, the tie path takes over and returns the magnitude summary.
    with pytest.warns(TieWarning):
        got = root_moment([1.0, -1.0], 2001)
    assert got == 1.0


def test_root_moment_power_of_two_scale_equivariance():
    rng = np.random.default_rng(21)
    x = rng.laplace(size=300)
    base = root_moment(x, 12)
    # scaling by an exact power of two must commute bitwise
    assert root_moment(4.0 * x, 12) == 4.0 * base
    assert root_moment(x / 8.0, 12) == base / 8.0


def test_root_moment_general_scale_equivariance():
    rng = np.random.default_rng(22)
    x = rng.standard_t(df=3, size=500)
    base = root_moment(x, 8)
    got = root_moment(1.7 * x, 8)
    assert got == pytest.approx(1.7 * base, rel=1e-12)


def test_root_moment_bracketed_by_extreme():
    rng = np.random.default_rng(23)
    x = rng.standard_normal(250)
    x_inf = np.max(np.abs(x))
    m = x.size
    for p in (10, 40, 200):
        r = abs(root_moment(x, p))
        assert x_inf * m ** (-1.0 / p) <= r <= x_inf * (1 + 1e-12)


def test_root_moment_monotone_in_even_order():
    rng = np.random.default_rng(24)
    x = rng.standard_t(df=4, size=600)
    values = [root_moment(x, p) for p in (2, 4, 8, 16, 64, 256)]
    for lo, hi in zip(values, values[1:]):
        assert hi >= lo * (1 - 1e-12)


def test_root_moment_acts_as_tail_filter():
    # One injected outlier should control the order-64 summary almost
    # completely while leaving the order-2 summary near the bulk scale.
    rng = np.random.default_rng(25)
    x = rng.standard_normal(2000)
    x[100] = 50.0
    r2 = root_moment(x, 2)
    r64 = root_moment(x, 64)
    assert r2 < 2.0
    assert r64 > 0.8 * 50.0


def test_log_moment_small_case():
    assert log_moment([3.0, 1.0], 2) == LOG_MOMENT_3_1_K2


def test_log_moment_far_outside_float_range():
    assert log_moment([1e300, 1e299], 5) == pytest.approx(
        LOG_MOMENT_HUGE_K5, rel=1e-15
    )


def test_log_moment_mixed_magnitudes():
    x = [1e6, -3.25e5, 1024.5, -7.0, 0.125]
    assert log_moment(x, 50) == LOG_MOMENT_MIX_K50


def test_log_moment_consistent_with_moment():
    rng = np.random.default_rng(26)
    x = rng.standard_t(df=5, size=300)
    for k in (1, 2, 5):
        assert math.exp(log_moment(x, k)) == pytest.approx(
            moment(x, 2 * k), rel=1e-9
        )


def test_extremes_reports_signed_and_absolute():
    ext = extremes([1.0, -2.0, 0.5])
    assert (ext.x_max, ext.x_min, ext.x_inf) == (1.0, -2.0, 2.0)
    ext = extremes([-1.0, -3.0])
    assert (ext.x_max, ext.x_min, ext.x_inf) == (-1.0, -3.0, 3.0)
    ext = extremes([4.0])
    assert (ext.x_max, ext.x_min, ext.x_inf) == (4.0, 4.0, 4.0)


def test_moment_rejects_empty_sample():
    with pytest.raises(DataError):
        moment([], 2)


def test_moment_rejects_non_finite():
    with pytest.raises(DataError):
        moment([1.0, math.nan], 2)
    with pytest.raises(DataError):
        root_moment([1.0, math.inf], 4)


def test_moment_rejects_order_below_one():
    with pytest.raises(ValueError):
        moment([1.0, 2.0], 0)
    with pytest.raises(ValueError):
        root_moment([1.0, 2.0], -3)


def test_log_moment_rejects_all_zero():
    with pytest.raises(DataError):
        log_moment([0.0, 0.0], 3)


def test_warnings_do_not_fire_without_tie():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        root_moment([1.0, -2.0, 0.5], 99)
        root_moment([3.0, 1.0], 7)
