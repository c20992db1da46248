"""Spectral model of the MFS on the unit disc.

With charges ``y_j = R exp(2 pi i j/N)`` the single-layer operator is
diagonal in Fourier space with eigenvalues

    s(m) = (i pi / 2) H_m^(1)(kR) J_m(k),

and the discrete MFS couples mode ``m`` only to its aliases ``m + bN``.
Everything here is carried in log space (see :class:`LogScaled`) so that
values far outside binary64 can be compared and divided.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np
from scipy.special import logsumexp

from .specialfn import (
    DomainError, LogScaled, iax, in_turning_window, log_hankel1_table, log_j_table, log_y_table,
    wkbj_a,
)

EPS_MACH = 1e-16
RESONANCE_FLOOR = math.log(1e-290)
_LOG_PI_2 = math.log(math.pi / 2)


class ResonanceError(ArithmeticError):
    """A disc eigenvalue vanishes (k is numerically a Dirichlet eigenvalue)."""


class NoHaltError(RuntimeError):
    """The halting criterion was not met within the scan range."""


def _bucket(m_max: int) -> int:
    return max(256, 256 * math.ceil(int(m_max) / 256))


# ---------------------------------------------------------------------------
# exact spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscSpectrum:
    """Table of ``s(m)`` for ``0 <= m <= m_max`` (``s`` is even in ``m``).

    Attributes
    ----------
    logmag : ndarray
        ``log|s(m)|``.
    phase : ndarray of complex
        ``s(m)/|s(m)|``.
    """

    k: float
    R: float
    m_max: int
    logmag: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, k: float, R: float, m_max: int) -> "DiscSpectrum":
        return _spectrum(float(k), float(R), _bucket(m_max))

    def log_abs(self, m):
        m = np.abs(np.asarray(m, dtype=int))
        if np.any(m > self.m_max):
            raise IndexError(f"order beyond table size {self.m_max}")
        return self.logmag[m]

    def log_values(self, m):
        m = np.abs(np.asarray(m, dtype=int))
        return self.logmag[m], self.phase[m]

    def __getitem__(self, m: int) -> LogScaled:
        m = abs(int(m))
        return LogScaled(float(self.logmag[m]), complex(self.phase[m]))


@lru_cache(maxsize=64)
def _spectrum(k: float, R: float, m_max: int) -> DiscSpectrum:
    if not k > 0:
        raise DomainError("wavenumber must be positive")
    if not R > 1:
        raise DomainError("charge radius must exceed 1")
    lj, sj = log_j_table(m_max, k)
    lh, ph = log_hankel1_table(m_max, k * R)
    logmag = _LOG_PI_2 + lj + lh
    phase = 1j * ph * sj
    logmag.flags.writeable = False
    phase.flags.writeable = False
    return DiscSpectrum(k, R, m_max, logmag, phase)


def s_hat(m: int, k: float, R: float) -> LogScaled:
    """Exact disc eigenvalue ``(i pi/2) H_m(kR) J_m(k)`` in log form."""
    return DiscSpectrum.build(k, R, abs(int(m)))[m]


def s_hat_laplace(m: int, R: float) -> LogScaled:
    """Zero-wavenumber limit ``R^-|m| / (2|m|)``."""
    m = abs(int(m))
    if m == 0:
        raise DomainError("Laplace eigenvalue form undefined at m = 0")
    return LogScaled(-math.log(2 * m) - m * math.log(R), 1.0)


def s_hat_improved(m: int, k: float, R: float) -> LogScaled:
    """``R^-|m| exp(k^2 (R^2 - 1) / 4|m|) / (2|m|)``."""
    m = abs(int(m))
    if m == 0:
        raise DomainError("improved eigenvalue form undefined at m = 0")
    return LogScaled(-math.log(2 * m) - m * math.log(R) + k * k * (R * R - 1) / (4 * m), 1.0)


def s_hat_uniform(m: int, k: float, R: float, return_flag: bool = False):
    """WKBJ estimate of ``|s(m)|`` uniform across the three regimes.

    For ``a < k`` this is the amplitude of the oscillating eigenvalues,
    not their value.  The estimate blows up algebraically at the turning
    points ``a = k`` and ``a = kR``; inside those windows the (still
    returned) value is flagged.
    """
    m = abs(int(m))
    if m < 1:
        raise DomainError("uniform eigenvalue form needs |m| >= 1")
    a = wkbj_a(m)
    a2 = a * a
    kr = k * R
    flag = in_turning_window(m, k) or in_turning_window(m, kr)
    if a == k or a == kr:
        out = LogScaled(math.inf, 1.0)
        return (out, True) if return_flag else out
    base = -0.25 * (math.log(abs(k * k - a2)) + math.log(abs(kr * kr - a2)))
    if a < k:
        lm = base
    elif a < kr:
        lm = math.log(0.5) + base + iax(a, k)
    else:
        lm = math.log(0.5) + base + iax(a, k) - iax(a, kr)
    out = LogScaled(lm, 1.0)
    return (out, flag) if return_flag else out


def q_element(m: int, j: int, N: int, k: float, R: float) -> LogScaled:
    """Element of the source-to-Fourier map: ``(N/2pi) s(m)`` if ``m = j mod N``."""
    if N % 2:
        raise ValueError("N must be even")
    if (m - j) % N:
        return LogScaled.zero()
    return s_hat(m, k, R) * (N / (2 * math.pi))


# ---------------------------------------------------------------------------
# data coefficient maps
# ---------------------------------------------------------------------------

class CoeffMap:
    """Fourier coefficients ``v(m)`` of boundary data, returned in log form.

    Subclasses implement :meth:`log_values` for integer arrays.
    """

    #: singularity radius of the data (``inf`` for entire data)
    rho: float = math.inf

    def log_values(self, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def __call__(self, m: int) -> LogScaled:
        lm, ph = self.log_values(np.array([int(m)]))
        return LogScaled(float(lm[0]), complex(ph[0]))

    def values(self, m) -> np.ndarray:
        lm, ph = self.log_values(np.asarray(m, dtype=int))
        with np.errstate(over="ignore"):
            return np.exp(lm) * ph


class VfundCoeffs(CoeffMap):
    """Coefficients ``-(1/4) Y_m(k rho) J_m(k)`` of ``-(1/4) Y0(k|z - rho|)``."""

    def __init__(self, k: float, rho: float):
        if not rho > 1:
            raise DomainError("source radius must exceed 1")
        self.k = float(k)
        self.rho = float(rho)

    def log_values(self, m):
        m = np.abs(np.asarray(m, dtype=int))
        top = _bucket(int(m.max()) if m.size else 0)
        lj, sj = log_j_table(top, self.k)
        ly, sy = log_y_table(top, self.k * self.rho)
        lm = math.log(0.25) + lj[m] + ly[m]
        return lm, (-sj[m] * sy[m]).astype(complex)


class ArrayCoeffs(CoeffMap):
    """Coefficients given explicitly for ``|m| <= m_max``; zero beyond."""

    def __init__(self, coeffs: dict, rho: float = math.inf):
        self._c = {int(k): complex(v) for k, v in coeffs.items()}
        self.rho = rho

    def log_values(self, m):
        m = np.asarray(m, dtype=int)
        v = np.array([self._c.get(int(i), 0j) for i in m.ravel()]).reshape(m.shape)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(v))
        ph = np.where(v != 0, v / np.where(v != 0, np.abs(v), 1.0), 1.0 + 0j)
        return lm, ph


class FunctionCoeffs(CoeffMap):
    """Wrap ``f(m) -> LogScaled | complex``."""

    def __init__(self, f: Callable, rho: float = math.inf):
        self.f = f
        self.rho = rho

    def log_values(self, m):
        m = np.asarray(m, dtype=int)
        out = [self.f(int(i)) for i in m.ravel()]
        out = [o if isinstance(o, LogScaled) else LogScaled.from_value(o) for o in out]
        lm = np.array([o.log_mag for o in out], dtype=float).reshape(m.shape)
        ph = np.array([complex(o.phase) for o in out]).reshape(m.shape)
        return lm, ph


def as_coeff_map(obj) -> CoeffMap:
    if isinstance(obj, CoeffMap):
        return obj
    if isinstance(obj, dict):
        return ArrayCoeffs(obj)
    if callable(obj):
        return FunctionCoeffs(obj)
    # bdata.BoundaryData without importing it here
    if hasattr(obj, "coeff_map"):
        raise TypeError("BoundaryData needs a wavenumber; pass data.coeff_map(k)")
    raise TypeError(f"cannot interpret {type(obj).__name__} as Fourier coefficients")


def vfund_coeff(m: int, k: float, rho: float) -> LogScaled:
    """Fourier coefficient of ``-(1/4) Y0(k|z - rho|)`` on the unit circle."""
    return VfundCoeffs(k, rho)(m)


# ---------------------------------------------------------------------------
# diagonal solve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalSolution:
    """Output of :func:`diagonal_solve`.

    ``alpha_hat[n]`` is stored for ``n = -N/2+1 .. N/2`` (see ``modes``);
    ``alpha`` is the charge vector for ``y_j``, ``j = 1..N``.
    """

    N: int
    modes: np.ndarray
    alpha_hat: np.ndarray
    alpha: np.ndarray
    t: float
    log_coeff_norm: float

    @property
    def coeff_norm(self) -> float:
        return math.exp(self.log_coeff_norm) if self.log_coeff_norm < 709 else math.inf


def band(N: int) -> np.ndarray:
    """Fourier modes ``-N/2 < n <= N/2``."""
    return np.arange(-N // 2 + 1, N // 2 + 1)


def diagonal_solve(N: int, k: float, R: float, v_hat, tail: int | None = None) -> DiagonalSolution:
    """Match each in-band Fourier mode of the data exactly.

    ``alpha_hat_n = (2 pi / N) v(n) / s(n)``; the boundary error is the
    aliasing residue of the out-of-band modes, summed for ``|m| <= 4N + 64``
    (or ``tail``).
    """
    if N < 2 or N % 2:
        raise ValueError("N must be a positive even integer")
    cmap = as_coeff_map(v_hat)
    L = 4 * N + 64 if tail is None else int(tail)
    spect = DiscSpectrum.build(k, R, L)
    n = band(N)
    ls_n, ps_n = spect.log_values(n)
    for mm, l in zip(n, ls_n):
        if abs(mm) <= k and l < RESONANCE_FLOOR:
            raise ResonanceError(f"eigenvalue s({mm}) vanishes at k={k}")
    lv_n, pv_n = cmap.log_values(n)
    la = math.log(2 * math.pi / N) + lv_n - ls_n
    pa = pv_n / ps_n
    with np.errstate(over="ignore"):
        alpha_hat = np.exp(la) * pa
    log_norm = 0.5 * math.log(N) + 0.5 * logsumexp(2 * la) if np.isfinite(la).any() else -math.inf
    # charges: alpha_j = sum_n alpha_hat_n exp(2 pi i n j / N), j = 1..N
    X = np.zeros(N, dtype=complex)
    X[n % N] = alpha_hat
    with np.errstate(invalid="ignore", over="ignore"):
        alpha = np.roll(N * np.fft.ifft(X), -1)
    # out-of-band residue
    m = np.arange(-L, L + 1)
    m = m[(m <= -N // 2) | (m > N // 2)]
    nm = (m + N // 2 - 1) % N - N // 2 + 1
    ls_m, ps_m = spect.log_values(m)
    lv_m, pv_m = cmap.log_values(m)
    idx = nm + N // 2 - 1
    l_fit = ls_m + (lv_n - ls_n)[idx]
    p_fit = ps_m * (pv_n / ps_n)[idx]
    shift = np.maximum(l_fit, lv_m)
    fin = np.isfinite(shift)
    with np.errstate(invalid="ignore"):
        diff = np.exp(l_fit[fin] - shift[fin]) * p_fit[fin] - np.exp(lv_m[fin] - shift[fin]) * pv_m[fin]
    mag = np.abs(diff)
    good = mag > 0
    if good.any():
        log_t = 0.5 * (math.log(2 * math.pi) + logsumexp(2 * (shift[fin][good] + np.log(mag[good]))))
        t = math.exp(log_t)
    else:
        t = 0.0
    return DiagonalSolution(N, n, alpha_hat, alpha, t, log_norm)


# ---------------------------------------------------------------------------
# finite-precision prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    """Predicted halting basis size and achievable error."""

    N0: int
    t0: float
    eps: float = EPS_MACH
    N0_laplace: float = math.nan
    growth: bool = True


def _log_s_model(mm: int, k: float, R: float, model: str) -> float:
    if model == "exact":
        return float(DiscSpectrum.build(k, R, mm).log_abs(mm))
    if model == "uniform":
        return s_hat_uniform(mm, k, R).log_mag
    raise ValueError(f"unknown eigenvalue model {model!r}")


def _log_v_model(cmap: CoeffMap, mm: int, k: float, model: str) -> float:
    if model == "uniform" and isinstance(cmap, VfundCoeffs):
        return math.log(1 / (2 * math.pi)) + s_hat_uniform(mm, k, cmap.rho).log_mag
    return float(cmap.log_values(np.array([mm]))[0][0])


def predict(N: int, k: float, R: float, data_coeffs, model: str = "exact") -> tuple[float, float]:
    """Order-of-magnitude ``(t, |alpha|)`` at basis size ``N``.

    ``t ~ |v(N/2)|`` and ``|alpha| ~ max(|v(N/2)| / (sqrt(N) |s(N/2)|), 1)``.
    ``model="uniform"`` replaces ``s`` (and fundamental-solution data) by the
    WKBJ estimate.
    """
    if N < 2 or N % 2:
        raise ValueError("N must be a positive even integer")
    cmap = as_coeff_map(data_coeffs)
    mm = N // 2
    lv = _log_v_model(cmap, mm, k, model)
    ls = _log_s_model(mm, k, R, model)
    t = math.exp(lv) if lv < 709 else math.inf
    la = lv - ls - 0.5 * math.log(N)
    a = max(math.exp(min(la, 709.0)), 1.0)
    return t, a


def predict_curves(Ns: Iterable[int], k: float, R: float, data_coeffs, model: str = "exact"):
    """Vectorized :func:`predict`; returns arrays ``(t, alpha_norm)``."""
    cmap = as_coeff_map(data_coeffs)
    Ns = np.asarray(list(Ns), dtype=int)
    mm = Ns // 2
    if model == "exact":
        ls = DiscSpectrum.build(k, R, int(mm.max())).log_abs(mm)
        lv = cmap.log_values(mm)[0]
    else:
        ls = np.array([_log_s_model(int(i), k, R, model) for i in mm])
        lv = np.array([_log_v_model(cmap, int(i), k, model) for i in mm])
    with np.errstate(over="ignore"):
        t = np.exp(lv)
        a = np.maximum(np.exp(np.minimum(lv - ls - 0.5 * np.log(Ns), 709.0)), 1.0)
    return t, a


def predict_halt(k: float, R: float, data_coeffs, eps: float = EPS_MACH,
                 rho: float | None = None) -> Prediction:
    """Predicted ``N0`` and ``t0`` for data with singularity radius ``rho``.

    For ``R > rho`` convergence halts once ``sqrt(N)|s(N/2)| <= eps``, and
    then ``t0 = |v(N0/2)|``.  Otherwise it halts when the predicted error
    itself reaches ``eps``.  The scan covers even ``N`` up to ``10k + 4000``
    and starts beyond the oscillatory band ``N/2 >= k`` (where ``|s|`` can
    only vanish at isolated zeros of ``J``).
    """
    if not R > 1:
        raise DomainError("charge radius must exceed 1")
    cmap = as_coeff_map(data_coeffs)
    if rho is None:
        rho = cmap.rho
    cap = int(10 * k + 4000)
    cap -= cap % 2
    Ns = np.arange(2, cap + 1, 2)
    mm = Ns // 2
    n_lap = 2 * math.log(1 / eps) / math.log(R)
    lv = cmap.log_values(mm)[0]
    leps = math.log(eps)
    growth = R > rho
    if growth:
        ls = DiscSpectrum.build(k, R, int(mm.max())).log_abs(mm)
        crit = 0.5 * np.log(Ns) + ls
        hit = np.flatnonzero((crit <= leps) & (mm >= k))
    else:
        hit = np.flatnonzero((lv <= leps) & (mm >= k))
    if hit.size == 0:
        raise NoHaltError(f"no halting crossing for N <= {cap} (k={k}, R={R})")
    i = int(hit[0])
    N0 = int(Ns[i])
    t0 = math.exp(lv[i]) if growth else eps
    return Prediction(N0, t0, eps, n_lap, growth)


# ---------------------------------------------------------------------------
# convergence regimes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRegime:
    """Asymptotic decay of the best error and growth of the coefficients.

    ``t ~ rate_base**N``; when ``coeff_growth``, ``|alpha| ~ growth_base**N``.
    """

    rate_base: float
    regime: str
    coeff_growth: bool
    growth_base: float | None

    @property
    def log_rate(self) -> float:
        return math.log(self.rate_base)


def rate_regime(rho: float, R: float) -> RateRegime:
    if not (rho > 1 and R > 1):
        raise DomainError("rho and R must exceed 1")
    R2 = R * R
    if math.isclose(rho, R2, rel_tol=1e-9):
        regime, base = "rho=R^2", 1 / R
    elif rho < R2:
        regime, base = "rho<R^2", rho ** -0.5
    else:
        regime, base = "rho>R^2", 1 / R
    growth = R > rho
    return RateRegime(base, regime, growth, math.sqrt(R / rho) if growth else None)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

SPECTRUM_COLUMNS = ("m", "log10_abs_s_exact", "log10_laplace", "log10_improved", "log10_uniform")
PREDICTION_COLUMNS = ("rho", "R", "N0", "log10_t0")


def spectrum_rows(k: float, R: float, m_values: Iterable[int]) -> list[tuple]:
    m_values = [int(m) for m in m_values]
    spect = DiscSpectrum.build(k, R, max(abs(m) for m in m_values))
    ln10 = math.log(10)
    rows = []
    for m in m_values:
        ex = float(spect.log_abs(m)) / ln10
        if m == 0:
            rows.append((m, ex, math.nan, math.nan, math.nan))
            continue
        rows.append((m, ex, s_hat_laplace(m, R).log10_abs, s_hat_improved(m, k, R).log10_abs,
                     s_hat_uniform(m, k, R).log10_abs))
    return rows


def prediction_rows(k: float, pairs: Iterable[tuple[float, float]], data_factory=None,
                    eps: float = EPS_MACH) -> list[tuple]:
    """Rows ``(rho, R, N0, log10_t0)``; data defaults to the fundamental solution at ``rho``."""
    rows = []
    for rho, R in pairs:
        cmap = VfundCoeffs(k, rho) if data_factory is None else data_factory(rho)
        p = predict_halt(k, R, cmap, eps=eps, rho=rho)
        rows.append((rho, R, p.N0, math.log10(p.t0)))
    return rows


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def write_table(path_or_file, columns, rows, header_lines: Iterable[str] = ()) -> None:
    """CSV with optional ``# `` comment lines ahead of the column header."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    finally:
        if own:
            fh.close()
