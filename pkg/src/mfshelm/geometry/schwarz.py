"""Schwarz function, reflection across the boundary, and its singularities."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .shapes import GeometryError, Shape, boundary_polyline

WINDING_SAMPLES = 4096
AMBIGUOUS_DISTANCE = 1e-9


class AmbiguousPointWarning(UserWarning):
    """A point lies on (or numerically on) the boundary polyline."""


def invert_parametrization(shape: Shape, z: complex, s_guess: complex | None = None,
                           tol: float = 1e-13, maxiter: int = 50) -> complex:
    """Solve ``Z(s) = z`` by Newton's method.

    Without a guess, Newton starts from the parameter of the nearest node of
    a 4096-point boundary sampling.
    """
    z = complex(z)
    if s_guess is None:
        poly = boundary_polyline(shape, WINDING_SAMPLES)
        s_guess = 2 * np.pi * int(np.argmin(np.abs(poly - z))) / WINDING_SAMPLES
    s = complex(s_guess)
    scale = max(1.0, abs(z))
    for _ in range(maxiter):
        f = shape(s) - z
        if abs(f) <= tol * scale:
            return s
        s = s - f / shape.deriv(s)
    if abs(shape(s) - z) <= 1e3 * tol * scale:
        return s
    raise GeometryError(f"inversion of Z did not converge for z={z} (last s={s})")


def schwarz(shape: Shape, z: complex, s_guess: complex | None = None) -> complex:
    """Schwarz function ``G(z) = conj(Z(conj(S(z))))``."""
    s = invert_parametrization(shape, z, s_guess)
    return complex(np.conj(shape(np.conj(s))))


def reflect(shape: Shape, z: complex, s_guess: complex | None = None) -> complex:
    """Reflection of ``z`` across the boundary, ``conj(G(z))``."""
    s = invert_parametrization(shape, z, s_guess)
    return complex(shape(np.conj(s)))


# ---------------------------------------------------------------------------
# inside / outside
# ---------------------------------------------------------------------------

def _segment_distance(poly: np.ndarray, z: np.ndarray) -> np.ndarray:
    a = poly[None, :]
    b = np.roll(poly, -1)[None, :]
    ab = b - a
    t = np.clip(np.real((z[:, None] - a) * np.conj(ab)) / np.abs(ab) ** 2, 0.0, 1.0)
    return np.min(np.abs(a + t * ab - z[:, None]), axis=1)


def winding_number(poly: np.ndarray, z, chunk: int = 256) -> np.ndarray:
    """Winding number of the closed polyline ``poly`` around each ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=float)
    nxt = np.roll(poly, -1)
    for i in range(0, z.size, chunk):
        zz = z[i:i + chunk, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            ang = np.angle((nxt[None, :] - zz) / (poly[None, :] - zz))
        out[i:i + chunk] = ang.sum(axis=1) / (2 * np.pi)
    return out


def is_exterior(shape: Shape, z, samples: int = WINDING_SAMPLES, polyline: np.ndarray | None = None):
    """True where ``z`` lies outside the closed curve ``Z([0, 2pi))``.

    Points within 1e-9 of the sampled polyline trigger
    :class:`AmbiguousPointWarning`.
    """
    poly = boundary_polyline(shape, samples) if polyline is None else polyline
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    wn = winding_number(poly, za)
    near = np.zeros(za.shape, dtype=bool)
    for i in range(0, za.size, 256):
        near[i:i + 256] = _segment_distance(poly, za[i:i + 256]) < AMBIGUOUS_DISTANCE
    if near.any():
        warnings.warn(f"{int(near.sum())} point(s) on the boundary polyline; "
                      "exterior classification is ambiguous", AmbiguousPointWarning, stacklevel=2)
    ext = np.abs(wn) < 0.5
    return ext if np.ndim(z) else bool(ext[0])


def distance_to_boundary(shape: Shape, z, samples: int = WINDING_SAMPLES) -> np.ndarray:
    poly = boundary_polyline(shape, samples)
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(za.shape)
    for i in range(0, za.size, 256):
        out[i:i + 256] = _segment_distance(poly, za[i:i + 256])
    return out


# ---------------------------------------------------------------------------
# singularities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Singularity:
    """A singularity of the Schwarz function.

    ``s_location = chi - i tau``; ``tau > 0`` puts it on the exterior side
    of the annular parametrization.
    """

    s_location: complex
    z_location: complex
    w_location: complex
    kind: str  # "pole" | "branch"
    exterior: bool

    @property
    def chi(self) -> float:
        return float(self.s_location.real)

    @property
    def tau(self) -> float:
        return float(-self.s_location.imag)


def _s_of_w(w: complex) -> complex:
    chi = math.atan2(w.imag, w.real) % (2 * math.pi)
    return complex(chi, -math.log(abs(w)))


def _derivative_numerator(shape: Shape) -> Polynomial:
    """Polynomial whose roots are the critical points of Z(w)."""
    powers = [n for n, c in shape.laurent if n != 0 and c != 0]
    shift = max(0, -(min(powers) - 1)) if powers else 0
    laur = Polynomial([0])
    for n, c in shape.laurent:
        if n != 0 and c != 0:
            coef = np.zeros(n - 1 + shift + 1, dtype=complex)
            coef[n - 1 + shift] = n * c
            laur = laur + Polynomial(coef)
    factors = [Polynomial([a, 1]) ** 2 for _, a in shape.rational]
    denom = Polynomial([1])
    for f in factors:
        denom = denom * f
    num = laur * denom
    wshift = Polynomial([0] * shift + [1]) if shift else Polynomial([1])
    for j, (d, _) in enumerate(shape.rational):
        rest = Polynomial([1])
        for i, f in enumerate(factors):
            if i != j:
                rest = rest * f
        num = num - d * wshift * rest
    return num


def _d2z_dw2(shape: Shape, w: complex) -> complex:
    out = 0j
    for n, c in shape.laurent:
        if n not in (0, 1):
            out += n * (n - 1) * c * w ** (n - 2)
    for d, a in shape.rational:
        out += 2 * d / (w + a) ** 3
    return out


def critical_points(shape: Shape, rmin: float = 0.1, rmax: float = 10.0) -> list[complex]:
    """Zeros of dZ/dw with ``rmin < |w| < rmax``, Newton-polished."""
    num = _derivative_numerator(shape)
    coef = num.coef
    nz = np.flatnonzero(np.abs(coef) > 1e-14 * np.abs(coef).max())
    if coef.size < 2 or nz.size == 0 or nz[-1] == 0:
        return []
    roots = Polynomial(coef[: nz[-1] + 1]).roots()
    found, unresolved = [], []
    for r in roots:
        if not rmin < abs(r) < rmax:
            continue
        w = complex(r)
        for _ in range(20):
            f = shape.dz_dw(w)
            step = f / _d2z_dw2(shape, w)
            w -= step
            if abs(step) < 1e-15 * max(1.0, abs(w)):
                break
        if abs(shape.dz_dw(w)) > 1e-8 * max(1.0, abs(shape.z_of_w(w))):
            unresolved.append(complex(r))
        else:
            found.append(w)
    if unresolved:
        raise GeometryError(f"critical point search failed for roots {unresolved}")
    return found


def find_singularities(shape: Shape, rmax: float = 10.0, polyline: np.ndarray | None = None) -> list[Singularity]:
    """Pole- and branch-type singularities of the Schwarz function.

    A pole ``p`` of Z gives a Schwarz pole at ``w = 1/conj(p)``; a critical
    point of Z gives a square-root branch point.  Candidates with
    ``0.1 < |w| < rmax`` are returned, sorted exterior-first by ``tau``.
    """
    poly = boundary_polyline(shape, WINDING_SAMPLES) if polyline is None else polyline
    cands = []
    for p in shape.poles:
        if p != 0:
            w = 1.0 / np.conj(p)
            if 0.1 < abs(w) < rmax:
                cands.append((complex(w), "pole"))
    cands += [(w, "branch") for w in critical_points(shape, 0.1, rmax)]
    out = []
    for w, kind in cands:
        z = complex(shape.z_of_w(w))
        ext = bool(is_exterior(shape, z, polyline=poly))
        out.append(Singularity(_s_of_w(w), z, w, kind, ext))
    out.sort(key=lambda s: (not s.exterior, s.tau))
    return out


def exterior_singularities(shape: Shape) -> list[Singularity]:
    """Singularities relevant to interior problems (outside, ``tau > 0``)."""
    return [s for s in find_singularities(shape) if s.exterior and s.tau > 0]
