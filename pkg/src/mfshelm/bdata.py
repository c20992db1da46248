"""Dirichlet boundary data with known analytic-continuation singularities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .discmodel import ArrayCoeffs, CoeffMap, VfundCoeffs
from .specialfn import DomainError

M_FFT = 4096


class DataEvaluationError(ValueError):
    """Boundary data evaluated at (or numerically on) its singularity."""


@dataclass(frozen=True)
class BoundaryData:
    """Boundary data ``v`` of one of three forms.

    ``constant``: ``v = c``.
    ``fundamental``: ``v = -(1/4) Y0(k |z - z0|)``.
    ``pole``: ``v = Re (z - z0)**(-order)``.
    """

    kind: str
    value: complex = 1.0
    source: complex | None = None
    order: int = 1

    def __post_init__(self):
        if self.kind not in ("constant", "fundamental", "pole"):
            raise ValueError(f"unknown data kind {self.kind!r}")
        if self.kind != "constant" and self.source is None:
            raise ValueError(f"{self.kind} data needs a source location")
        if self.kind == "pole" and int(self.order) < 1:
            raise ValueError("pole order must be a positive integer")

    @property
    def singularity(self) -> complex | None:
        return None if self.kind == "constant" else complex(self.source)

    def __call__(self, z, k: float = 1.0):
        return evaluate(self, z, k)

    def coeff_map(self, k: float) -> CoeffMap:
        """Fourier coefficients on the unit circle in log form."""
        if self.kind == "constant":
            return ArrayCoeffs({0: self.value}, rho=math.inf)
        if self.kind == "fundamental":
            z0 = complex(self.source)
            base = VfundCoeffs(k, abs(z0))
            phi = math.atan2(z0.imag, z0.real)
            # an off-axis source is a rotation of the on-axis one
            return base if phi == 0 else _RotatedCoeffs(base, phi)
        return PoleCoeffs(complex(self.source), int(self.order))


def constant(c: complex = 1.0) -> BoundaryData:
    return BoundaryData("constant", value=c)


def fundamental(source: complex) -> BoundaryData:
    return BoundaryData("fundamental", source=complex(source))


def pole(source: complex, order: int = 1) -> BoundaryData:
    return BoundaryData("pole", source=complex(source), order=int(order))


def evaluate(data: BoundaryData, z, k: float = 1.0):
    """Evaluate ``v`` at points ``z`` (``k`` is only used by fundamental data)."""
    z = np.asarray(z, dtype=complex)
    if data.kind == "constant":
        out = np.full(z.shape, data.value, dtype=complex)
        return out if out.ndim else complex(out)
    d = z - data.source
    if np.any(np.abs(d) <= 1e-14 * max(1.0, abs(data.source))):
        raise DataEvaluationError(f"data evaluated at its singularity {data.source}")
    if data.kind == "fundamental":
        out = -0.25 * special.y0(k * np.abs(d))
    else:
        out = np.real(d ** (-int(data.order)))
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else complex(out)


def singularity_radius(data: BoundaryData) -> float:
    """Distance from the origin of the data singularity (``inf`` for constants)."""
    return math.inf if data.kind == "constant" else abs(complex(data.source))


@dataclass(frozen=True)
class FourierCoeffs:
    """FFT coefficients ``v(m)`` for ``-M/2 < m <= M/2``.

    Coefficients with ``|m| > M/4`` are outside the alias-safe band.
    """

    M_fft: int
    coeffs: np.ndarray  # indexed by m mod M_fft

    def __getitem__(self, m: int) -> complex:
        m = int(m)
        if not -self.M_fft // 2 < m <= self.M_fft // 2:
            raise IndexError(f"mode {m} outside the FFT range")
        return complex(self.coeffs[m % self.M_fft])

    @property
    def safe_band(self) -> int:
        return self.M_fft // 4

    def is_safe(self, m: int) -> bool:
        return abs(int(m)) <= self.safe_band

    def as_dict(self, safe_only: bool = True) -> dict:
        lim = self.safe_band if safe_only else self.M_fft // 2
        return {m: self[m] for m in range(-lim + (0 if safe_only else 1), lim + 1)}


def fourier_coeffs(data: BoundaryData, k: float = 1.0, M_fft: int = M_FFT) -> FourierCoeffs:
    """Fourier coefficients of ``v`` restricted to the unit circle."""
    if M_fft < 8 or M_fft & (M_fft - 1):
        raise ValueError("M_fft must be a power of two >= 8")
    if data.kind != "constant" and abs(abs(data.source) - 1.0) < 1e-12:
        raise DataEvaluationError("data singularity lies on the unit circle")
    theta = 2 * np.pi * np.arange(M_fft) / M_fft
    v = evaluate(data, np.exp(1j * theta), k)
    return FourierCoeffs(M_fft, np.fft.fft(v) / M_fft)


class PoleCoeffs(CoeffMap):
    """Closed-form coefficients of ``Re (z - z0)**(-n)`` on ``|z| = 1``, ``|z0| > 1``.

    ``(z - z0)**-n = (-z0)**-n sum_m C(m+n-1, n-1) (z/z0)**m``; the real part
    splits each term between ``m`` and ``-m``.
    """

    def __init__(self, source: complex, order: int = 1):
        if not abs(source) > 1:
            raise DomainError("pole data needs |z0| > 1 for its unit-circle series")
        self.z0 = complex(source)
        self.n = int(order)
        self.rho = abs(self.z0)

    def log_values(self, m):
        m = np.asarray(m, dtype=int)
        am = np.abs(m).astype(float)
        n = self.n
        lr = math.log(self.rho)
        lbin = (special.gammaln(am + n) - special.gammaln(am + 1) - math.lgamma(n))
        lm = -n * lr + lbin - am * lr
        arg = -(n * np.angle(-self.z0) + am * np.angle(self.z0))
        ph = np.exp(1j * arg)
        # real part: half to each of +-m, conjugated for negative m
        lm = np.where(m == 0, lm, lm + math.log(0.5))
        ph = np.where(m < 0, np.conj(ph), ph)
        ph = np.where(m == 0, np.sign(np.real(ph)) + 0j, ph)
        lm = np.where(m == 0, lm + np.log(np.abs(np.cos(arg)) + 1e-300), lm)
        return lm, ph


class _RotatedCoeffs(CoeffMap):
    """Coefficients of data rotated by angle ``phi`` about the origin."""

    def __init__(self, base: CoeffMap, phi: float):
        self.base = base
        self.phi = phi
        self.rho = base.rho

    def log_values(self, m):
        lm, ph = self.base.log_values(m)
        return lm, ph * np.exp(-1j * np.asarray(m) * self.phi)
