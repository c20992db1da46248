import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfshelm.specialfn import (
    DomainError, LogScaled, bessel_j, bessel_j_log, bessel_y, bessel_y_log, hankel1, hankel1_log,
    iax, in_turning_window, largeorder_j, largeorder_j_log, largeorder_y, largeorder_y_log,
    log_j_table, log_y_table, turning_point, wkbj_h_logmag, wkbj_h_mag, wkbj_j_logmag, wkbj_j_mag,
)

X_GRID = np.round(np.geomspace(0.1, 100, 25), 6)


def rel(a, b):
    return abs(a - b) / abs(b)


# -- direct values -----------------------------------------------------------

def test_j0_at_zero():
    assert bessel_j(0, 0.0) == 1.0


def test_reflection_examples():
    assert bessel_j(-3, 1.7) == pytest.approx(-bessel_j(3, 1.7), rel=1e-15)
    assert bessel_y(-2, 0.9) == pytest.approx(bessel_y(2, 0.9), rel=1e-15)


def test_oracle_values(oracle):
    assert rel(bessel_j(5, 2.0), oracle["J5_2"]) < 1e-12
    assert rel(bessel_y(0, 2.0), oracle["Y0_2"]) < 1e-12
    h = hankel1(3, 10.0)
    assert abs(h - complex(*oracle["H3_10"])) < 1e-12 * abs(h)


@pytest.mark.parametrize("name, fn", [("J_grid", bessel_j), ("Y_grid", bessel_y)])
def test_direct_grid_against_oracle(oracle, name, fn):
    for key, ref in oracle[name].items():
        m, x = key.split(",")
        val = fn(int(m), float(x))
        if abs(ref) > 1e-280 and math.isfinite(val):
            assert rel(val, ref) < 1e-11, key


def test_y1_diverges_at_zero():
    vals = [bessel_y(1, x) for x in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(b < a < 0 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < -1e7


def test_hankel_definition():
    assert hankel1(0, 1.0) == bessel_j(0, 1.0) + 1j * bessel_y(0, 1.0)


def test_hankel_never_zero():
    for m in range(0, 201, 5):
        for x in (0.1, 1.0, 10.0, 50.0, 100.0):
            assert not hankel1_log(m, x).is_zero


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        bessel_y(0, 0.0)
    with pytest.raises(DomainError):
        bessel_j(1.5, 1.0)
    with pytest.raises(DomainError):
        iax(10.0, 11.0)


def test_underflow_and_overflow_status():
    val, status = bessel_j(400, 1.0, full_output=True)
    assert val == 0.0 and status == "underflow"
    val, status = bessel_y(400, 1.0, full_output=True)
    assert math.isinf(val) and status == "overflow"


# -- identities ----------------------------------------------------------------

def test_reflection_grid():
    for m in range(0, 51):
        sign = (-1) ** m
        jm, jp = bessel_j(-m, X_GRID), bessel_j(m, X_GRID)
        ym, yp = bessel_y(-m, X_GRID), bessel_y(m, X_GRID)
        np.testing.assert_allclose(jm, sign * jp, rtol=1e-12, atol=0)
        ok = np.isfinite(yp)
        np.testing.assert_allclose(ym[ok], sign * yp[ok], rtol=1e-12, atol=0)


def test_wronskian():
    xs = np.linspace(0.5, 200, 400)
    for m in range(0, 101):
        w = bessel_j(m + 1, xs) * bessel_y(m, xs) - bessel_j(m, xs) * bessel_y(m + 1, xs)
        ok = np.isfinite(w)
        np.testing.assert_allclose(w[ok], 2 / (np.pi * xs[ok]), rtol=1e-10)
        # overflow of Y only happens where J underflows at tiny x
        assert ok[xs > m / 2].all()


def test_wronskian_log_scaled():
    # where direct products overflow, the log tables still satisfy the identity
    for x in (0.5, 2.0, 30.0):
        lj, pj = log_j_table(300, x)
        ly, py = log_y_table(300, x)
        for m in (150, 250, 299):
            a = pj[m + 1] * py[m] * np.exp(lj[m + 1] + ly[m] - math.log(2 / (math.pi * x)))
            b = pj[m] * py[m + 1] * np.exp(lj[m] + ly[m + 1] - math.log(2 / (math.pi * x)))
            assert a - b == pytest.approx(1.0, rel=1e-10)


def test_log_scaled_consistency_grid():
    for m in (0, 1, 3, 10, 40, 120, 300):
        for x in np.geomspace(0.05, 400, 30):
            d = bessel_j(m, x)
            if d != 0 and abs(d) > 1e-280:
                L = bessel_j_log(m, x)
                assert L.sign * math.exp(L.log_mag) == pytest.approx(d, rel=1e-11), (m, x)
            d = bessel_y(m, x)
            if math.isfinite(d) and abs(d) > 1e-280:
                L = bessel_y_log(m, x)
                assert L.sign * math.exp(L.log_mag) == pytest.approx(d, rel=1e-11), (m, x)


def test_log_scaled_examples(oracle):
    L = bessel_j_log(5, 2.0)
    assert L.sign * math.exp(L.log_mag) == pytest.approx(bessel_j(5, 2.0), rel=1e-12)
    assert bessel_j_log(0, 0.5).phase == 1.0
    L = bessel_y_log(10, 5.0)
    assert L.sign * math.exp(L.log_mag) == pytest.approx(oracle["Y10_5"], rel=1e-12)


def test_log_scaled_large_orders(oracle):
    assert bessel_j_log(1500, 500).log_mag == pytest.approx(oracle["logJ_1500_500"], rel=1e-11)
    assert bessel_y_log(1500, 625).log_mag == pytest.approx(oracle["logY_1500_625"], rel=1e-11)
    assert bessel_j_log(3000, 600).log_mag == pytest.approx(oracle["logJ_3000_600"], rel=1e-11)
    assert bessel_y_log(3000, 600).log_mag == pytest.approx(oracle["logY_3000_600"], rel=1e-11)
    # |Y_1500(625)| ~ 1e397 is outside binary64
    assert bessel_y_log(1500, 625).value() == -math.inf


def test_log_scaled_large_orders_vs_wkbj(oracle):
    assert rel(wkbj_j_logmag(1500, 500), bessel_j_log(1500, 500).log_mag) < 0.01
    # |H| and |Y| coincide in the evanescent regime
    assert rel(wkbj_h_logmag(1500, 625), oracle["logY_1500_625"]) < 0.01


def test_y_phase_real():
    for m in (0, 3, 17, 90):
        for x in (0.3, 4.0, 55.0):
            assert bessel_y_log(m, x).phase in (1.0, -1.0)


def test_log_scaled_needs_nonnegative_order():
    with pytest.raises(DomainError):
        bessel_j_log(-3, 1.7)


def test_hankel_log_matches_direct():
    for m, x in ((0, 1.0), (3, 10.0), (40, 12.0), (7, 60.0)):
        h = hankel1(m, x)
        L = hankel1_log(m, x)
        assert abs(L.value() - h) < 1e-11 * abs(h)


def test_logscaled_arithmetic():
    a = LogScaled.from_value(-3.0)
    b = LogScaled.from_value(2j)
    assert (a * b).value() == pytest.approx(-6j)
    assert (a / b).value() == pytest.approx(-3.0 / 2j)
    assert LogScaled.zero().is_zero
    assert LogScaled(1000.0, -1.0).value() == -math.inf
    with pytest.raises(ZeroDivisionError):
        a / LogScaled.zero()


# -- iax, turning points, large order, WKBJ ---------------------------------------

def test_iax_values(oracle):
    assert iax(7.0, 7.0) == 0.0
    assert iax(1500, 500) < 0
    assert iax(1500, 500) == pytest.approx(oracle["iax_1500_500"], rel=1e-13)


@given(st.floats(1.0, 5000.0), st.integers(2, 200))
@settings(max_examples=50, deadline=None)
def test_iax_monotone(a, n):
    xs = np.linspace(a / 1000, a, n)
    vals = [iax(a, x) for x in xs]
    assert all(v1 < v2 for v1, v2 in zip(vals, vals[1:]))
    assert vals[-1] == 0.0


def test_turning_point_regimes():
    assert turning_point(10, 20, 1.5).regime == "oscillatory"
    assert turning_point(25, 20, 1.5).regime == "evanescent-between"
    assert turning_point(40, 20, 1.5).regime == "evanescent-beyond"
    assert in_turning_window(100, 95) and not in_turning_window(100, 85)
    assert in_turning_window(20, 16) and not in_turning_window(20, 14)


def test_largeorder(oracle):
    assert rel(largeorder_j_log(200, 1.0).log_mag, oracle["logJ_200_1"]) < 1e-3
    assert largeorder_y(50, 2.0) / oracle["Y50_2"] == pytest.approx(1.0, abs=1e-2)
    for m, z in ((10, 1.0), (50, 3.0), (300, 2.0)):
        prod = (largeorder_j_log(m, z) * largeorder_y_log(m, z)).value()
        assert prod == pytest.approx(-1 / (math.pi * m), rel=1e-12)
    assert largeorder_j(1, 0.1) == pytest.approx(bessel_j(1, 0.1), rel=1e-2)


def test_wkbj_examples(oracle):
    assert rel(wkbj_j_logmag(100, 50), math.log(oracle["J100_50"])) < 0.02
    for r in (1e4, 1e5):
        assert wkbj_j_mag(3, r) == pytest.approx(math.sqrt(2 / (math.pi * r)), rel=1e-2)
    # shared oscillatory amplitude
    assert wkbj_h_mag(30, 80.0) == pytest.approx(wkbj_j_mag(30, 80.0))


def _nearest_local_max(m, r):
    """Location of the local maximum of |J_m| nearest to ``r`` (oscillatory side)."""
    period = 2 * math.pi / math.sqrt(max(1 - (m / r) ** 2, 1e-6))
    xs = np.linspace(r - period, r + period, 4001)
    a = np.abs(bessel_j(m, xs))
    peaks = np.flatnonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:])) + 1
    return float(xs[peaks[np.argmin(np.abs(xs[peaks] - r))]])


@pytest.mark.parametrize("m", [20, 35, 60, 100, 200])
def test_wkbj_validity(m):
    for r in np.linspace(0.2 * m, 3.0 * m, 40):
        if abs(m - r) <= max(5, 0.1 * m):
            continue
        if r < m:
            w = wkbj_j_logmag(m, r)
            ref = bessel_j_log(m, r).log_mag
        else:
            # oscillatory: the amplitude is compared at local maxima of |J_m|
            r = _nearest_local_max(m, r)
            if abs(m - r) <= max(5, 0.1 * m):
                continue
            w = wkbj_j_logmag(m, r)
            ref = math.log(abs(bessel_j(m, r)))
        assert abs(w - ref) <= 0.05 * abs(ref), (m, r, w, ref)


def test_turning_flag():
    val, flag = wkbj_j_logmag(100, 97.0, return_flag=True)
    assert flag
    val, flag = wkbj_j_logmag(100, 50.0, return_flag=True)
    assert not flag
