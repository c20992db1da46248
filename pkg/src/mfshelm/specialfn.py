"""Integer-order Bessel and Hankel functions of real argument.

Direct values are delegated to ``scipy.special`` (Cephes / AMOS).  The
log-scaled variants extend those past the binary64 range with ratio
recurrences: downward (Miller) for J, where J is the minimal solution,
and upward for Y.  Products such as ``J_1500(500) * Y_1500(625)`` are
then formed as sums of logarithms.

The asymptotic forms (large order, WKBJ magnitudes and the ``I_a``
exponent) are written out in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

# Direct values below this magnitude (or above its reciprocal) are rebuilt
# by recurrence; keeps well clear of subnormals.
TINY = 1e-280
HUGE = 1e280
_LOG_MAX = 709.78  # log(float max)


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class TurningPointWarning(UserWarning):
    """A WKBJ formula was evaluated close to its turning point."""


@dataclass(frozen=True)
class LogScaled:
    """A number stored as ``exp(log_mag) * phase``.

    ``phase`` is ``+1.0``/``-1.0`` for real quantities and a unit-modulus
    complex otherwise; ``log_mag == -inf`` encodes exact zero.
    """

    log_mag: float
    phase: complex | float = 1.0

    @classmethod
    def from_value(cls, x: complex | float) -> "LogScaled":
        if x == 0:
            return cls(-math.inf, 1.0)
        if isinstance(x, complex) or np.iscomplexobj(x):
            x = complex(x)
            mag = abs(x)
            return cls(math.log(mag), x / mag)
        x = float(x)
        return cls(math.log(abs(x)), math.copysign(1.0, x))

    @classmethod
    def zero(cls) -> "LogScaled":
        return cls(-math.inf, 1.0)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    @property
    def log10_abs(self) -> float:
        return self.log_mag / math.log(10.0)

    @property
    def sign(self) -> float:
        """Sign of a real quantity (the phase for real values)."""
        return float(np.real(self.phase))

    def value(self) -> complex | float:
        """Materialize, saturating to ``inf`` or ``0`` outside binary64."""
        if self.log_mag > _LOG_MAX:
            mag = math.inf
        else:
            mag = math.exp(self.log_mag)
        return mag * self.phase

    def __abs__(self) -> "LogScaled":
        return LogScaled(self.log_mag, 1.0)

    def __neg__(self) -> "LogScaled":
        return LogScaled(self.log_mag, -self.phase)

    def conjugate(self) -> "LogScaled":
        return LogScaled(self.log_mag, np.conj(self.phase))

    def __mul__(self, other) -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_value(other)
        return LogScaled(self.log_mag + other.log_mag, _norm_phase(self.phase * other.phase))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogScaled":
        if not isinstance(other, LogScaled):
            other = LogScaled.from_value(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a LogScaled zero")
        return LogScaled(self.log_mag - other.log_mag, _norm_phase(self.phase / other.phase))


def _norm_phase(p):
    if isinstance(p, complex):
        a = abs(p)
        return p / a if a else 1.0
    return math.copysign(1.0, p)


def _check_order(m) -> int:
    if int(m) != m:
        raise DomainError(f"integer order required, got {m!r}")
    return int(m)


def _reflect_sign(m: int) -> float:
    return -1.0 if (m < 0 and m % 2) else 1.0


# ---------------------------------------------------------------------------
# direct evaluation
# ---------------------------------------------------------------------------

def bessel_j(m: int, x, full_output: bool = False):
    """J_m(x) for integer ``m`` and real ``x >= 0``.

    With ``full_output`` returns ``(value, status)`` where status is
    ``"ok"`` or ``"underflow"`` (value flushed to 0 although J_m(x) != 0).
    """
    m = _check_order(m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("bessel_j requires x >= 0")
    val = _reflect_sign(m) * special.jv(abs(m), xa)
    if not full_output:
        return val if val.ndim else float(val)
    under = (np.abs(val) == 0) & (xa > 0)
    status = np.where(under, "underflow", "ok")
    if val.ndim:
        return val, status
    return float(val), str(status)


def bessel_y(m: int, x, full_output: bool = False):
    """Y_m(x) for integer ``m`` and real ``x > 0``.

    Overflow gives a signed infinity; with ``full_output`` the status
    ``"overflow"`` is reported.
    """
    m = _check_order(m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("bessel_y requires x > 0 (logarithmic singularity at 0)")
    val = _reflect_sign(m) * special.yv(abs(m), xa)
    if not full_output:
        return val if val.ndim else float(val)
    status = np.where(np.isinf(val), "overflow", "ok")
    if val.ndim:
        return val, status
    return float(val), str(status)


def hankel1(m: int, x):
    """H_m^(1)(x) = J_m(x) + i Y_m(x)."""
    j = bessel_j(m, x)
    y = bessel_y(m, x)
    return j + 1j * y


# ---------------------------------------------------------------------------
# log-scaled tables
# ---------------------------------------------------------------------------

def _readonly(*arrays):
    for a in arrays:
        a.flags.writeable = False
    return arrays


@lru_cache(maxsize=256)
def log_j_table(n_max: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """``(log|J_n(x)|, sign J_n(x))`` for ``n = 0..n_max``.

    Orders whose direct value underflows are obtained from the last
    representable order by multiplying ratios ``J_n/J_{n-1}``, which are
    produced by downward recurrence from well above ``n_max``.
    """
    if x <= 0:
        raise DomainError("log-scaled J requires x > 0")
    n = np.arange(n_max + 1)
    direct = special.jv(n, x)
    logmag = np.full(n_max + 1, -np.inf)
    sign = np.ones(n_max + 1)
    ok = np.abs(direct) > TINY
    logmag[ok] = np.log(np.abs(direct[ok]))
    sign[ok] = np.sign(direct[ok])
    # Inside the oscillatory band a tiny value is an exact zero; left as -inf.
    bad = np.flatnonzero(~ok & (n > x))
    if bad.size == 0:
        return _readonly(logmag, sign)
    n_u = int(bad[0])
    # downward recurrence for r_n = J_n / J_{n-1}
    top = n_max + 60 + int(4.0 * math.sqrt(max(n_max, x)))
    r = x / (2.0 * top)
    ratios = np.empty(n_max + 1 - n_u)
    for nn in range(top - 1, n_u - 1, -1):
        r = 1.0 / (2.0 * nn / x - r)
        if nn <= n_max:
            ratios[nn - n_u] = r
    acc = logmag[n_u - 1]
    s = sign[n_u - 1]
    for i, nn in enumerate(range(n_u, n_max + 1)):
        acc += math.log(abs(ratios[i]))
        if ratios[i] < 0:
            s = -s
        logmag[nn] = acc
        sign[nn] = s
    return _readonly(logmag, sign)


@lru_cache(maxsize=256)
def log_y_table(n_max: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """``(log|Y_n(x)|, sign Y_n(x))`` for ``n = 0..n_max``.

    Overflowing orders are continued by upward recurrence on the ratio
    ``Y_n/Y_{n-1}`` (the stable direction for the dominant solution).
    """
    if x <= 0:
        raise DomainError("log-scaled Y requires x > 0")
    if x < 1e-250:
        raise DomainError("argument too small for log-scaled Y")
    n = np.arange(n_max + 1)
    direct = special.yv(n, x)
    logmag = np.empty(n_max + 1)
    sign = np.ones(n_max + 1)
    ok = np.isfinite(direct) & (np.abs(direct) < HUGE)
    with np.errstate(divide="ignore"):
        logmag[ok] = np.log(np.abs(direct[ok]))
    sign[ok] = np.sign(direct[ok])
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return _readonly(logmag, sign)
    n_u = int(bad[0])
    if n_u < 2:
        # only reachable for tiny x: seed from the small-argument forms
        logmag[0] = math.log(abs(special.y0(x)))
        sign[0] = math.copysign(1.0, special.y0(x))
        logmag[1] = math.log(2.0 / (math.pi * x))
        sign[1] = -1.0
        n_u = 2
    sigma = sign[n_u - 1] * sign[n_u - 2] * math.exp(logmag[n_u - 1] - logmag[n_u - 2])
    acc = logmag[n_u - 1]
    s = sign[n_u - 1]
    for nn in range(n_u, n_max + 1):
        sigma = 2.0 * (nn - 1) / x - 1.0 / sigma
        acc += math.log(abs(sigma))
        if sigma < 0:
            s = -s
        logmag[nn] = acc
        sign[nn] = s
    return _readonly(logmag, sign)


def bessel_j_log(m: int, x: float) -> LogScaled:
    """J_m(x) as a :class:`LogScaled`; finite even where J_m underflows."""
    m = _check_order(m)
    if m < 0:
        raise DomainError("bessel_j_log takes a nonnegative order")
    if x <= 0:
        raise DomainError("bessel_j_log requires x > 0")
    v = special.jv(m, x)
    if abs(v) > TINY:
        return LogScaled(math.log(abs(v)), math.copysign(1.0, v))
    lm, sg = log_j_table(m, float(x))
    return LogScaled(float(lm[m]), float(sg[m]))


def bessel_y_log(m: int, x: float) -> LogScaled:
    """Y_m(x) as a :class:`LogScaled`; finite even where Y_m overflows."""
    m = _check_order(m)
    if m < 0:
        raise DomainError("bessel_y_log takes a nonnegative order")
    if x <= 0:
        raise DomainError("bessel_y_log requires x > 0")
    v = special.yv(m, x)
    if np.isfinite(v) and abs(v) < HUGE:
        return LogScaled(math.log(abs(v)), math.copysign(1.0, v))
    lm, sg = log_y_table(m, float(x))
    return LogScaled(float(lm[m]), float(sg[m]))


def hankel1_log(m: int, x: float) -> LogScaled:
    """|m|-th order H^(1)(x) as a complex :class:`LogScaled` (m >= 0)."""
    return _combine_hankel(bessel_j_log(m, x), bessel_y_log(m, x))


def _combine_hankel(j: LogScaled, y: LogScaled) -> LogScaled:
    # |H| = |Y| sqrt(1 + (J/Y)^2), formed without materializing either factor
    if j.is_zero:
        return LogScaled(y.log_mag, complex(0.0, y.sign))
    d = j.log_mag - y.log_mag
    if d < 0:
        log_h = y.log_mag + 0.5 * math.log1p(math.exp(2 * d))
    else:
        log_h = j.log_mag + 0.5 * math.log1p(math.exp(-2 * d))
    re = j.sign * math.exp(j.log_mag - log_h)
    im = y.sign * math.exp(y.log_mag - log_h)
    return LogScaled(log_h, _norm_phase(complex(re, im)))


def log_hankel1_table(n_max: int, x: float) -> tuple[np.ndarray, np.ndarray]:
    """``(log|H_n(x)|, H_n(x)/|H_n(x)|)`` for ``n = 0..n_max``."""
    lj, sj = log_j_table(n_max, float(x))
    ly, sy = log_y_table(n_max, float(x))
    big = np.maximum(lj, ly)
    with np.errstate(invalid="ignore"):
        log_h = big + 0.5 * np.log(np.exp(2 * (lj - big)) + np.exp(2 * (ly - big)))
    phase = sj * np.exp(lj - log_h) + 1j * sy * np.exp(ly - log_h)
    phase /= np.abs(phase)
    return log_h, phase


# ---------------------------------------------------------------------------
# asymptotic forms
# ---------------------------------------------------------------------------

def iax(a: float, x: float) -> float:
    """Evanescent exponent ``sqrt(a^2-x^2) - a ln[(a+sqrt(a^2-x^2))/x]``.

    Nonpositive on ``0 < x <= a`` and zero at ``x = a``.
    """
    if not 0 < x:
        raise DomainError("iax requires x > 0")
    if x > a:
        raise DomainError(f"iax undefined in the oscillatory regime (x={x} > a={a})")
    s = math.sqrt((a - x) * (a + x))
    return s - a * math.log1p((a - x + s) / x)


@dataclass(frozen=True)
class TurningPointData:
    """Order ``m``, ``a = sqrt(m^2 - 1/4)`` and the regime relative to k, kR."""

    m: int
    a: float
    regime: str  # "oscillatory" | "evanescent-between" | "evanescent-beyond"


def turning_point(m: int, k: float, R: float) -> TurningPointData:
    a = wkbj_a(m)
    if a < k:
        regime = "oscillatory"
    elif a < k * R:
        regime = "evanescent-between"
    else:
        regime = "evanescent-beyond"
    return TurningPointData(int(m), a, regime)


def wkbj_a(m: int) -> float:
    """sqrt(m^2 - 1/4); for m = 0 returns the modulus of the imaginary root."""
    a2 = m * m - 0.25
    return math.sqrt(a2) if a2 > 0 else 0.0


def in_turning_window(m: int, r: float, width: float | None = None) -> bool:
    """True when ``|m - r| <= max(5, 0.1 m)`` (or the supplied width)."""
    if width is None:
        width = max(5.0, 0.1 * abs(m))
    return abs(abs(m) - r) <= width


def largeorder_j_log(m: int, z: float) -> LogScaled:
    """Large-order form ``(1/m!) (z/2)^m exp(-z^2/4m)`` of J_m(z)."""
    if m < 1:
        raise DomainError("largeorder_j needs m >= 1")
    return LogScaled(-math.lgamma(m + 1) + m * math.log(z / 2) - z * z / (4 * m), 1.0)


def largeorder_y_log(m: int, z: float) -> LogScaled:
    """Large-order form ``-((m-1)!/pi) (z/2)^(-m) exp(z^2/4m)`` of Y_m(z)."""
    if m < 1:
        raise DomainError("largeorder_y needs m >= 1")
    return LogScaled(math.lgamma(m) - math.log(math.pi) - m * math.log(z / 2) + z * z / (4 * m), -1.0)


def largeorder_j(m: int, z: float) -> float:
    return float(largeorder_j_log(m, z).value())


def largeorder_y(m: int, z: float) -> float:
    return float(largeorder_y_log(m, z).value())


def _wkbj_log(m: int, r: float, kind: str) -> tuple[float, bool]:
    m = abs(_check_order(m))
    if m < 1:
        raise DomainError("WKBJ magnitudes need |m| >= 1")
    if r <= 0:
        raise DomainError("WKBJ magnitudes need r > 0")
    a = wkbj_a(m)
    flagged = in_turning_window(m, r)
    if r == a:
        return math.inf, True
    if r > a:
        # oscillatory amplitude, shared by J and H
        return 0.5 * math.log(2 / math.pi) - 0.25 * math.log((r - a) * (r + a)), flagged
    base = -0.25 * math.log((a - r) * (a + r))
    if kind == "j":
        return base - 0.5 * math.log(2 * math.pi) + iax(a, r), flagged
    return base + 0.5 * math.log(2 / math.pi) - iax(a, r), flagged


def wkbj_j_logmag(m: int, r: float, return_flag: bool = False):
    """Natural log of the WKBJ size of |J_m(r)|.

    Amplitude for ``r > a`` (oscillatory), magnitude for ``r < a``.
    """
    val, flag = _wkbj_log(m, r, "j")
    return (val, flag) if return_flag else val


def wkbj_h_logmag(m: int, r: float, return_flag: bool = False):
    """Natural log of the WKBJ size of |H_m^(1)(r)|."""
    val, flag = _wkbj_log(m, r, "h")
    return (val, flag) if return_flag else val


def wkbj_j_mag(m: int, r: float, return_flag: bool = False):
    val, flag = _wkbj_log(m, r, "j")
    out = math.exp(val) if val < _LOG_MAX else math.inf
    return (out, flag) if return_flag else out


def wkbj_h_mag(m: int, r: float, return_flag: bool = False):
    val, flag = _wkbj_log(m, r, "h")
    out = math.exp(val) if val < _LOG_MAX else math.inf
    return (out, flag) if return_flag else out
