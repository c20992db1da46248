"""Charge-point placement: disc circle, annular curves and the adaptive curve."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from shapely.geometry import LinearRing

from .schwarz import Singularity, distance_to_boundary, exterior_singularities, is_exterior
from .shapes import GeometryError, Shape, boundary_polyline

CURVE_SAMPLES = 4096
BETA = 0.7
GAMMA = 0.4


class SelfIntersectionWarning(UserWarning):
    """The generating charge curve crosses itself."""


@dataclass(frozen=True)
class ChargeSet:
    """Charge points ``y_j`` and the curve they were drawn from.

    Attributes
    ----------
    points : ndarray of complex, shape (N,)
    strategy : str
        ``disc-circle``, ``annular`` or ``adaptive``.
    params : dict
        Strategy parameters (R, spacing, beta, gamma, dmax, ...).
    curve_samples : ndarray of complex
        Dense closed polyline of the generating curve.
    chi : ndarray
        Real parameters of the points along the curve.
    """

    points: np.ndarray
    strategy: str
    params: dict = field(default_factory=dict)
    curve_samples: np.ndarray = field(default_factory=lambda: np.empty(0, complex))
    chi: np.ndarray = field(default_factory=lambda: np.empty(0))
    self_intersecting: bool = False

    @property
    def N(self) -> int:
        return len(self.points)

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.strategy}({inner})"


def _is_simple(curve: np.ndarray) -> bool:
    ring = LinearRing(np.column_stack([curve.real, curve.imag]))
    return bool(ring.is_simple)


def _check_curve(shape: Shape, curve: np.ndarray, points: np.ndarray, what: str) -> bool:
    """Verify exteriority of the curve and points; warn on self-intersection."""
    poly = boundary_polyline(shape, CURVE_SAMPLES)
    step = max(1, curve.size // 1024)
    if not np.all(is_exterior(shape, curve[::step], polyline=poly)):
        raise GeometryError(f"{what} curve crosses the boundary")
    if not np.all(is_exterior(shape, points, polyline=poly)):
        raise GeometryError(f"{what} charge points inside the domain")
    if np.min(distance_to_boundary(shape, points)) <= 1e-6:
        raise GeometryError(f"{what} charge points touch the boundary")
    simple = _is_simple(curve)
    if not simple:
        warnings.warn(f"{what} charge curve self-intersects", SelfIntersectionWarning, stacklevel=3)
    return not simple


def _require_even(N: int) -> None:
    if N < 2 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")


def place_disc(N: int, R: float) -> ChargeSet:
    """``y_j = R exp(2 pi i j / N)``, ``j = 1..N``."""
    _require_even(N)
    if not R > 1.0:
        raise GeometryError(f"charge radius R={R} must exceed 1")
    j = np.arange(1, N + 1)
    chi = 2 * np.pi * j / N
    pts = R * np.exp(1j * chi)
    curve = R * np.exp(2j * np.pi * np.arange(CURVE_SAMPLES) / CURVE_SAMPLES)
    return ChargeSet(pts, "disc-circle", {"R": R}, curve, chi)


def place_annular(shape: Shape, N: int, R: float, spacing: str = "conformal-angle",
                  check: bool = True) -> ChargeSet:
    """Charges on ``Gamma_R = {Z(chi - i ln R)}``.

    ``spacing="conformal-angle"`` uses ``chi_j = 2 pi j / N``; ``"arclength"``
    equispaces arclength along ``Gamma_R``.
    """
    _require_even(N)
    if not R > 1.0:
        raise GeometryError(f"annular radius R={R} must exceed 1")
    tau = math.log(R)
    if tau >= shape.strip_limit:
        raise GeometryError(f"R={R} reaches a singularity of the parametrization "
                            f"(strip limit R={math.exp(shape.strip_limit):.6g})")
    grid = 2 * np.pi * np.arange(CURVE_SAMPLES) / CURVE_SAMPLES
    curve = np.asarray(shape(grid - 1j * tau))
    if spacing == "conformal-angle":
        chi = 2 * np.pi * np.arange(1, N + 1) / N
    elif spacing == "arclength":
        g = np.linspace(0, 2 * np.pi, CURVE_SAMPLES + 1)
        speed = np.abs(shape.deriv(g - 1j * tau))
        arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(g))])
        inv = PchipInterpolator(arc, g)
        chi = np.asarray(inv(arc[-1] * np.arange(1, N + 1) / N))
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    pts = np.asarray(shape(chi - 1j * tau))
    crossed = _check_curve(shape, curve, pts, "annular") if check else False
    return ChargeSet(pts, "annular", {"R": R, "spacing": spacing}, curve, chi, crossed)


# ---------------------------------------------------------------------------
# adaptive curve
# ---------------------------------------------------------------------------

def dmax_rule(k: float, rule: str = "min") -> float:
    """Distance cap ``min(1, 25/k)``; ``rule="max"`` gives the literal ``max`` form."""
    if rule == "min":
        return min(1.0, 25.0 / k)
    if rule == "max":
        return max(1.0, 25.0 / k)
    raise ValueError(f"unknown dmax rule {rule!r}")


@dataclass(frozen=True)
class AdaptiveCurve:
    """Depth function ``y(chi)`` of the adaptive charge curve.

    ``1/y = |Z'(chi)|/dmax + sum_s [gamma tau_s + beta (1 - cos(chi - chi_s)) / tau_s]^-1``
    """

    shape: Shape
    dmax: float
    chis: np.ndarray
    taus: np.ndarray
    beta: float = BETA
    gamma: float = GAMMA

    def inverse_depth(self, chi):
        chi = np.asarray(chi, dtype=float)
        out = np.zeros_like(chi)
        if math.isfinite(self.dmax):
            out = out + np.abs(self.shape.deriv(chi)) / self.dmax
        for cs, ts in zip(self.chis, self.taus):
            out = out + 1.0 / (self.gamma * ts + self.beta * (1 - np.cos(chi - cs)) / ts)
        return out

    def __call__(self, chi):
        return 1.0 / self.inverse_depth(chi)

    def points(self, chi):
        chi = np.asarray(chi, dtype=float)
        return self.shape(chi - 1j * self(chi))


def adaptive_curve(shape: Shape, k: float, singularities: Sequence[Singularity] | None = None,
                   beta: float = BETA, gamma: float = GAMMA, dmax_override: float | None = None,
                   rule: str = "min") -> AdaptiveCurve:
    """Build the adaptive depth function.

    Parameters
    ----------
    singularities : sequence of Singularity, optional
        Exterior singularities (``tau > 0``); found automatically if omitted.
    dmax_override : float, optional
        Replace the rule-based cap; ``math.inf`` disables the first term.
    """
    if beta <= 0 or gamma <= 0:
        raise ValueError("beta and gamma must be positive")
    if singularities is None:
        singularities = exterior_singularities(shape)
    taus = np.array([s.tau for s in singularities], dtype=float)
    chis = np.array([s.chi for s in singularities], dtype=float)
    if np.any(taus <= 0):
        raise ValueError("singularities must have tau > 0")
    dmax = dmax_rule(k, rule) if dmax_override is None else float(dmax_override)
    if not math.isfinite(dmax) and taus.size == 0:
        raise GeometryError("adaptive curve undefined: no singularities and no distance cap")
    return AdaptiveCurve(shape, dmax, chis, taus, beta, gamma)


def _rk4_cumulative(f, a: float, b: float, n: int):
    g = np.linspace(a, b, n + 1)
    h = g[1] - g[0]
    fl, fm, fr = f(g[:-1]), f(g[:-1] + h / 2), f(g[1:])
    u = np.concatenate([[0.0], np.cumsum(h / 6 * (fl + 4 * fm + fr))])
    return g, u


def place_adaptive(shape: Shape, k: float, N: int, beta: float = BETA, gamma: float = GAMMA,
                   singularities: Sequence[Singularity] | None = None,
                   dmax_override: float | None = None, rule: str = "min",
                   check: bool = True) -> ChargeSet:
    """Charges on the adaptive curve with local spacing proportional to ``y(chi)``."""
    if N < 2:
        raise ValueError("need N >= 2 charges")
    curve_fn = adaptive_curve(shape, k, singularities, beta, gamma, dmax_override, rule)
    # the curve must stay inside the strip where Z is pole-free
    for p in shape.poles:
        if abs(p) > 1.0:
            chi_p = math.atan2(p.imag, p.real) % (2 * math.pi)
            if curve_fn(chi_p) >= math.log(abs(p)):
                raise GeometryError(f"adaptive curve reaches the parametrization pole w={p}")
    g, u = _rk4_cumulative(curve_fn.inverse_depth, 0.0, 2 * np.pi, CURVE_SAMPLES)
    inv = PchipInterpolator(u, g)
    chi = np.asarray(inv(u[-1] * np.arange(N) / N))
    pts = np.asarray(curve_fn.points(chi))
    dense = np.asarray(curve_fn.points(g[:-1]))
    crossed = _check_curve(shape, dense, pts, "adaptive") if check else False
    params = {"k": k, "beta": beta, "gamma": gamma, "dmax": curve_fn.dmax,
              "singularities": len(curve_fn.taus)}
    return ChargeSet(pts, "adaptive", params, dense, chi, crossed)


def place_charges(shape: Shape, N: int, strategy: str = "annular", R: float = 1.5,
                  spacing: str = "conformal-angle", k: float = 1.0, **kw) -> ChargeSet:
    """Dispatch on the strategy name used in configuration files."""
    if strategy == "disc-circle":
        if shape.kind != "disc":
            raise ValueError("disc-circle placement requires the disc shape")
        return place_disc(N, R)
    if strategy == "annular":
        return place_annular(shape, N, R, spacing)
    if strategy == "adaptive":
        return place_adaptive(shape, k, N, **kw)
    raise ValueError(f"unknown placement strategy {strategy!r}")


__all__ = [
    "AdaptiveCurve", "ChargeSet", "SelfIntersectionWarning", "adaptive_curve", "dmax_rule",
    "place_adaptive", "place_annular", "place_charges", "place_disc",
]
