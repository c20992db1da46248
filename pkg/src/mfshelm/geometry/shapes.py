"""Analytic boundary parametrizations Z(s), s in [0, 2pi).

Every catalog shape is stored in one normal form in the annular variable
``w = exp(i s)``::

    Z(w) = sum_n c_n w**n + sum_j d_j / (w + a_j)

so extension to complex ``s``, derivatives, poles and critical points all
follow from the coefficient lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(RuntimeError):
    """Evaluation at a pole, failed inversion, or an invalid charge curve."""


@dataclass(frozen=True)
class Shape:
    """Boundary curve ``Z(s)`` in Laurent + simple-pole form.

    Parameters
    ----------
    kind : str
        Catalog name (``disc``, ``rounded-triangle``, ``inverted-ellipse``,
        ``crescent``, ``generalized-crescent``, ``radial-star`` or
        ``custom-laurent``).
    laurent : tuple of (int, complex)
        Terms ``c_n w**n``.
    rational : tuple of (complex, complex)
        Terms ``d / (w + a)`` given as ``(d, a)``.
    params : tuple of (str, value)
        The catalog parameters the shape was built from (for reports).
    """

    kind: str
    laurent: tuple = ((1, 1.0),)
    rational: tuple = ()
    params: tuple = field(default=(), compare=False)

    # -- evaluation in w --------------------------------------------------
    def z_of_w(self, w):
        w = np.asarray(w, dtype=complex)
        self._check_poles(w)
        out = np.zeros_like(w)
        for n, c in self.laurent:
            out = out + c * w**n
        for d, a in self.rational:
            out = out + d / (w + a)
        return out if out.ndim else complex(out)

    def dz_dw(self, w):
        w = np.asarray(w, dtype=complex)
        self._check_poles(w)
        out = np.zeros_like(w)
        for n, c in self.laurent:
            if n != 0:
                out = out + n * c * w ** (n - 1)
        for d, a in self.rational:
            out = out - d / (w + a) ** 2
        return out if out.ndim else complex(out)

    def _check_poles(self, w):
        scale = np.maximum(1.0, np.abs(w))
        for _, a in self.rational:
            if np.any(np.abs(w + a) <= 1e-12 * scale):
                raise GeometryError(f"Z evaluated at its pole w = {-a}")
        if any(n < 0 for n, _ in self.laurent) and np.any(w == 0):
            raise GeometryError("Z evaluated at its pole w = 0")

    # -- evaluation in s --------------------------------------------------
    def __call__(self, s):
        return self.z_of_w(np.exp(1j * np.asarray(s, dtype=complex)))

    def deriv(self, s):
        w = np.exp(1j * np.asarray(s, dtype=complex))
        out = 1j * w * self.dz_dw(w)
        return out if np.ndim(out) else complex(out)

    # -- structure --------------------------------------------------------
    @property
    def poles(self) -> list[complex]:
        """Finite nonzero poles of Z in the w-plane."""
        return [complex(-a) for _, a in self.rational]

    @property
    def strip_limit(self) -> float:
        """Largest ``tau`` for which ``Z(chi - i tau)`` stays pole-free.

        Set by poles of Z outside the unit w-circle and by positive Laurent
        powers (which are entire, so they impose no limit).
        """
        outside = [abs(p) for p in self.poles if abs(p) > 1.0]
        return math.log(min(outside)) if outside else math.inf

    def param_dict(self) -> dict:
        return dict(self.params)


def boundary_point(shape: Shape, s):
    """Z(s) for real or complex ``s``."""
    return shape(s)


def boundary_deriv(shape: Shape, s):
    """Z'(s) = i w dZ/dw."""
    return shape.deriv(s)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def disc() -> Shape:
    return Shape("disc", ((1, 1.0),), (), ())


def rounded_triangle(a1: float = 0.3) -> Shape:
    """Z(s) = e^{is} + a1 e^{-2is}."""
    return Shape("rounded-triangle", ((1, 1.0), (-2, complex(a1))), (), (("a1", a1),))


def inverted_ellipse(a2: float = 0.25) -> Shape:
    """Z(s) = e^{is} / (1 + a2 e^{2is}), stored by partial fractions."""
    b = 1j / math.sqrt(a2)
    d = 1.0 / (2.0 * a2)
    return Shape("inverted-ellipse", (), ((d, -b), (d, b)), (("a2", a2),))


def crescent(a3: float = 0.1, a4: float = 0.9) -> Shape:
    """Z(s) = e^{is} - a3 / (e^{is} + a4)."""
    return Shape("crescent", ((1, 1.0),), ((complex(-a3), complex(a4)),), (("a3", a3), ("a4", a4)))


def generalized_crescent(a5=0.9, a6=-0.8 - 0.2j, a7=-0.2 + 0.5j) -> Shape:
    """Crescent with three pole terms (poles at -a5, -a6, -a7)."""
    rational = (
        (complex(-0.1), complex(a5)),
        (complex(-0.07 - 0.02j), complex(a6)),
        (complex(0.2), complex(a7)),
    )
    return Shape("generalized-crescent", ((1, 1.0),), rational, (("a5", a5), ("a6", a6), ("a7", a7)))


def radial_star(amplitude: float = 0.3, frequency: int = 5) -> Shape:
    """Z(s) = (1 + amplitude cos(frequency s)) e^{is}."""
    p = int(frequency)
    half = amplitude / 2.0
    laurent = ((1, 1.0), (p + 1, complex(half)), (1 - p, complex(half)))
    return Shape("radial-star", laurent, (), (("amplitude", amplitude), ("frequency", p)))


def custom_laurent(terms, rational=()) -> Shape:
    """Z(s) = sum c_n e^{ins} + sum d / (e^{is} + a).

    ``terms`` is a sequence of ``(n, c_n)``, ``rational`` of ``(d, a)``.
    """
    terms = tuple((int(n), complex(c)) for n, c in terms)
    rational = tuple((complex(d), complex(a)) for d, a in rational)
    if not terms and not rational:
        raise ValueError("custom-laurent shape needs at least one term")
    return Shape("custom-laurent", terms, rational, (("terms", terms), ("rational", rational)))


CATALOG = {
    "disc": disc,
    "rounded-triangle": rounded_triangle,
    "inverted-ellipse": inverted_ellipse,
    "crescent": crescent,
    "generalized-crescent": generalized_crescent,
    "radial-star": radial_star,
    "custom-laurent": custom_laurent,
}


def make_shape(kind: str, **params) -> Shape:
    try:
        factory = CATALOG[kind]
    except KeyError:
        raise ValueError(f"unknown shape kind {kind!r}; expected one of {sorted(CATALOG)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryNodes:
    """Equispaced parameter nodes with trapezoid arclength weights."""

    points: np.ndarray
    params: np.ndarray
    weights: np.ndarray

    @property
    def M(self) -> int:
        return len(self.points)

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())


def boundary_nodes(shape: Shape, M: int) -> BoundaryNodes:
    """Nodes ``s_m = 2 pi m / M`` with weights ``(2 pi / M) |Z'(s_m)|``."""
    if M < 4:
        raise ValueError("need at least 4 boundary nodes")
    s = 2 * np.pi * np.arange(M) / M
    pts = np.asarray(shape(s))
    w = (2 * np.pi / M) * np.abs(shape.deriv(s))
    return BoundaryNodes(pts, s, w)


def boundary_polyline(shape: Shape, n: int = 4096) -> np.ndarray:
    return np.asarray(shape(2 * np.pi * np.arange(n) / n))


def perimeter(shape: Shape, n: int = 4096) -> float:
    return boundary_nodes(shape, n).perimeter
