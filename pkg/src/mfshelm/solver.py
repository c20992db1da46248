"""MFS collocation solver, convergence sweeps and rate fits."""

from __future__ import annotations

import csv
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import special
from scipy.linalg import solve_triangular

from .bdata import BoundaryData, evaluate as evaluate_data
from .geometry import (
    ChargeSet, GeometryError, SelfIntersectionWarning, Shape, boundary_nodes, is_exterior,
    place_adaptive, place_annular, place_disc, winding_number,
)
from .geometry.shapes import BoundaryNodes

CHUNK = 512


class SolverError(RuntimeError):
    """Non-finite matrix entries or a degenerate configuration."""


@dataclass(frozen=True)
class Kernel:
    """Fundamental solution used for the basis.

    ``hankel1``: ``(i/4) H0(kr)``.  ``y0-mixed``: ``(i/4)(Y0 + i eta J0)(kr)``.
    """

    kind: str = "hankel1"
    eta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hankel1", "y0-mixed"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "y0-mixed" and self.eta == 0:
            raise ValueError("y0-mixed kernel needs eta != 0")

    def __call__(self, kr):
        j0 = special.j0(kr)
        y0 = special.y0(kr)
        if self.kind == "hankel1":
            return -0.25 * y0 + 0.25j * j0
        return -0.25 * self.eta * j0 + 0.25j * y0


def assemble(nodes, charges, k: float, kernel: Kernel = Kernel()) -> np.ndarray:
    """Collocation matrix ``A[m, j] = Phi(k |x_m - y_j|)``."""
    x = np.asarray(getattr(nodes, "points", nodes), dtype=complex)
    y = np.asarray(getattr(charges, "points", charges), dtype=complex)
    A = np.empty((x.size, y.size), dtype=complex)
    for i in range(0, x.size, CHUNK):
        r = np.abs(x[i:i + CHUNK, None] - y[None, :])
        if np.any(r == 0):
            raise SolverError("collocation node coincides with a charge point")
        A[i:i + CHUNK] = kernel(k * r)
    if not np.all(np.isfinite(A)):
        raise SolverError("non-finite collocation matrix entries")
    return A


def least_squares(A: np.ndarray, v: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Minimize ``sum_m w_m |(A alpha - v)_m|^2`` by unpivoted Householder QR.

    No column scaling or rank truncation: the coefficient growth produced
    by nearly dependent columns is kept as is.
    """
    M, N = A.shape
    if M < N:
        raise ValueError(f"need M >= N (got M={M}, N={N})")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(v))):
        raise SolverError("non-finite least-squares input")
    if weights is None:
        Aw, vw = A, np.asarray(v, dtype=complex)
    else:
        sw = np.sqrt(np.asarray(weights, dtype=float))
        Aw, vw = A * sw[:, None], sw * v
    Q, Rm = np.linalg.qr(Aw, mode="reduced")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_triangular(Rm, Q.conj().T @ vw, check_finite=False)


def boundary_error(A: np.ndarray, alpha: np.ndarray, v: np.ndarray, weights: np.ndarray) -> float:
    """``t = sqrt(sum_m w_m |(A alpha - v)_m|^2)``."""
    r = A @ alpha - v
    return float(np.sqrt(np.sum(weights * np.abs(r) ** 2)))


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Placement:
    """How charges are placed: ``disc-circle``, ``annular`` or ``adaptive``."""

    strategy: str = "annular"
    R: float = 1.5
    spacing: str = "conformal-angle"
    beta: float = 0.7
    gamma: float = 0.4
    dmax: float | None = None
    dmax_rule: str = "min"

    def place(self, shape: Shape, N: int, k: float) -> ChargeSet:
        if self.strategy == "disc-circle":
            if shape.kind != "disc":
                raise GeometryError("disc-circle placement requires the disc shape")
            return place_disc(N, self.R)
        if self.strategy == "annular":
            return place_annular(shape, N, self.R, self.spacing)
        if self.strategy == "adaptive":
            return place_adaptive(shape, k, N, self.beta, self.gamma,
                                  dmax_override=self.dmax, rule=self.dmax_rule)
        raise ValueError(f"unknown placement strategy {self.strategy!r}")


def default_M(N: int, k: float) -> int:
    """Oversampled node count ``max(3N/2, ceil(8k))``."""
    return int(max(math.ceil(1.5 * N), math.ceil(8 * k)))


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one MFS solve."""

    alpha: np.ndarray
    t: float
    coeff_norm: float
    N: int
    M: int
    residual_samples: np.ndarray
    wall_time: float
    charges: ChargeSet | None = None
    nodes: BoundaryNodes | None = None
    metadata: dict = field(default_factory=dict)

    def recompute_t(self, shape: Shape, k: float, data: BoundaryData, kernel: Kernel = Kernel()) -> float:
        nodes = boundary_nodes(shape, self.M) if self.nodes is None else self.nodes
        A = assemble(nodes, self.charges, k, kernel)
        v = evaluate_data(data, nodes.points, k)
        return boundary_error(A, self.alpha, v, nodes.weights)


def solve_bvp(shape: Shape, k: float, data: BoundaryData, placement: Placement | ChargeSet, N: int,
              M: int | None = None, kernel: Kernel = Kernel()) -> SolveResult:
    """Place charges, collocate on ``M`` nodes and solve in least squares."""
    start = time.perf_counter()
    M = default_M(N, k) if M is None else int(M)
    if M < N:
        raise ValueError(f"need M >= N (got M={M}, N={N})")
    charges = placement if isinstance(placement, ChargeSet) else placement.place(shape, N, k)
    nodes = boundary_nodes(shape, M)
    A = assemble(nodes, charges, k, kernel)
    v = evaluate_data(data, nodes.points, k)
    alpha = least_squares(A, v, nodes.weights)
    resid = A @ alpha - v
    t = float(np.sqrt(np.sum(nodes.weights * np.abs(resid) ** 2)))
    wall = time.perf_counter() - start
    perim = nodes.perimeter
    meta = {
        "placement": charges.describe(),
        "perimeter": perim,
        "dof_per_wavelength": N * 2 * math.pi / (k * perim),
        "self_intersecting": charges.self_intersecting,
        "kernel": kernel.kind,
    }
    return SolveResult(alpha, t, float(np.linalg.norm(alpha)), int(N), M, resid, wall,
                       charges, nodes, meta)


def evaluate_field(alpha: np.ndarray, charges, k: float, points, kernel: Kernel = Kernel()) -> np.ndarray:
    """``u(x) = sum_j alpha_j Phi(k |x - y_j|)`` by direct summation.

    Points coinciding with a charge give ``nan``.
    """
    y = np.asarray(getattr(charges, "points", charges), dtype=complex)
    p = np.asarray(points, dtype=complex)
    flat = p.ravel()
    out = np.empty(flat.shape, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    for i in range(0, flat.size, CHUNK):
        r = np.abs(flat[i:i + CHUNK, None] - y[None, :])
        bad = np.any(r == 0, axis=1)
        r[r == 0] = 1.0
        out[i:i + CHUNK] = kernel(k * r) @ alpha
        out[i:i + CHUNK][bad] = np.nan
    return out.reshape(p.shape)


def interior_grid(shape: Shape, spacing: float, margin: float = 0.0):
    """Grid points of the given spacing that lie inside the domain."""
    poly = shape(2 * np.pi * np.arange(4096) / 4096)
    x = np.arange(poly.real.min() - margin, poly.real.max() + margin + spacing / 2, spacing)
    y = np.arange(poly.imag.min() - margin, poly.imag.max() + margin + spacing / 2, spacing)
    X, Y = np.meshgrid(x, y)
    z = (X + 1j * Y).ravel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        inside = ~is_exterior(shape, z, polyline=poly)
    return z[inside]


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveConfig:
    """Everything but the sweep variable."""

    shape: Shape
    k: float
    data: BoundaryData
    placement: Placement = Placement()
    M: int | None = None
    kernel: Kernel = Kernel()
    N: int | None = None


@dataclass(frozen=True)
class SweepRow:
    sweep_var: float
    N: int
    M: int
    t: float
    coeff_norm: float
    wall_ms: float
    error: str | None = None


@dataclass(frozen=True)
class RateFit:
    """Least-squares slopes of ``ln t`` and ``ln |alpha|`` per unit N."""

    t_slope: float
    coeff_slope: float
    window: tuple[float, float]
    residual: float
    n_rows: int


@dataclass
class ConvergenceRecord:
    sweep: str  # "N" | "R"
    rows: list[SweepRow]
    fitted_rate: RateFit | None = None
    metadata: dict = field(default_factory=dict)

    def ok_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.error is None]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.ok_rows()], dtype=float)

    @property
    def plateau_index(self) -> int | None:
        return detect_plateau(self.column("t"), self.column("coeff_norm"))

    def write_csv(self, path_or_file, header_lines: Iterable[str] = ()) -> None:
        own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            for line in header_lines:
                fh.write(f"# {line}\n")
            if self.fitted_rate is not None:
                f = self.fitted_rate
                fh.write(f"# fit t_slope=%.17g coeff_slope=%.17g window=%g..%g residual=%.6g rows=%d\n"
                         % (f.t_slope, f.coeff_slope, f.window[0], f.window[1], f.residual, f.n_rows))
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sweep_var", "N", "M", "t", "coeff_norm", "wall_ms"])
            for r in self.rows:
                if r.error is not None:
                    fh.write(f"# error at {r.sweep_var:g}: {r.error}\n")
                    continue
                w.writerow(["%.17g" % r.sweep_var, r.N, r.M, "%.17g" % r.t, "%.17g" % r.coeff_norm,
                            "%.3f" % r.wall_ms])
        finally:
            if own:
                fh.close()


def _run_row(cfg: SolveConfig, N: int, var: float) -> SweepRow:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SelfIntersectionWarning)
            res = solve_bvp(cfg.shape, cfg.k, cfg.data, cfg.placement, N, cfg.M, cfg.kernel)
        return SweepRow(var, N, res.M, res.t, res.coeff_norm, 1e3 * res.wall_time)
    except (GeometryError, SolverError, ValueError, ArithmeticError) as exc:
        return SweepRow(var, N, cfg.M or default_M(N, cfg.k), math.nan, math.nan, 0.0, str(exc))


def _run_all(tasks, jobs: int):
    if jobs <= 1:
        return [_run_row(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(lambda t: _run_row(*t), tasks))


def sweep_n(config: SolveConfig, N_list: Sequence[int], jobs: int = 1, n_min: float | None = None) -> ConvergenceRecord:
    """One solve per basis size; fits rates on the pre-plateau window."""
    N_list = [int(n) for n in N_list]
    if not N_list:
        raise ValueError("empty N list")
    if N_list != sorted(N_list):
        raise ValueError("N list must be sorted ascending")
    rows = _run_all([(config, N, float(N)) for N in N_list], jobs)
    rec = ConvergenceRecord("N", rows)
    try:
        rec.fitted_rate = fit_rate(rec, n_min=n_min)
    except ValueError:
        rec.fitted_rate = None
    return rec


def sweep_r(config: SolveConfig, R_list: Sequence[float], N: int | None = None, jobs: int = 1) -> ConvergenceRecord:
    """One solve per charge radius at fixed ``N``."""
    R_list = [float(r) for r in R_list]
    N = config.N if N is None else N
    if N is None:
        raise ValueError("sweep_r needs a fixed N")
    if not R_list:
        raise ValueError("empty R list")
    if R_list != sorted(R_list):
        raise ValueError("R list must be sorted ascending")
    tasks = [(replace(config, placement=replace(config.placement, R=R)), int(N), R) for R in R_list]
    return ConvergenceRecord("R", _run_all(tasks, jobs))


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------

def convergence_onset(t: np.ndarray) -> tuple[int, int]:
    """``(peak, drop)`` row indices marking where convergence begins.

    ``drop`` is the row before ``t`` first falls tenfold below its running
    maximum and ``peak`` the largest ``t`` up to there.  Below ``N ~ 2k``
    nothing converges, and that flat band must not pass for a plateau.
    """
    t = np.asarray(t, dtype=float)
    runmax = np.maximum.accumulate(t)
    hit = np.flatnonzero(t < 0.1 * runmax)
    if hit.size == 0:
        return 0, 0
    drop = max(0, int(hit[0]) - 1)
    return int(np.argmax(t[: drop + 1])), drop


def decay_start(t: np.ndarray, jitter: float = 0.05) -> int:
    """Row from which ``t`` decreases for good (up to ``jitter``).

    Any rise above the jitter level marks the row as pre-asymptotic; the
    fit window starts at the last such rise.
    """
    t = np.asarray(t, dtype=float)
    rises = np.flatnonzero(t[1:] > (1 + jitter) * t[:-1]) + 1
    return int(rises[-1]) if rises.size else 0


def detect_plateau(t: np.ndarray, coeff_norm: np.ndarray | None = None, rel: float = 0.03,
                   run: int = 3, floor_ratio: float = 1e-12) -> int | None:
    """Row at which convergence stalls, or None.

    The plateau starts at the row holding the best ``t`` so far when none of
    the next ``run`` rows improves on it by ``rel`` or more.  Comparing with
    the running minimum (rather than row to row) keeps round-off noise on
    the floor from hiding the plateau; the row returned is the first one
    within a factor 2 of that floor.  With ``coeff_norm`` given, only rows
    already near the round-off level ``t <= floor_ratio |alpha|`` qualify,
    which rules out pre-asymptotic bumps.
    """
    t = np.asarray(t, dtype=float)
    if t.size < run + 1:
        return None
    ok = np.ones(t.size, dtype=bool)
    if coeff_norm is not None:
        ok = t <= floor_ratio * np.asarray(coeff_norm, dtype=float)
    start = convergence_onset(t)[1]
    best = start
    for i in range(start, t.size - run):
        if t[i] < t[best]:
            best = i
        if ok[best] and np.all(t[i + 1:i + 1 + run] > (1 - rel) * t[best]):
            # report the first row already within a factor 2 of the floor
            return start + int(np.flatnonzero(t[start:best + 1] <= 2 * t[best])[0])
    return None


def fit_window(record: ConvergenceRecord, n_min: float | None = None) -> np.ndarray:
    """Boolean mask of the rows used for rate fits."""
    t = record.column("t")
    n = record.column("N")
    hi = detect_plateau(t, record.column("coeff_norm"))
    hi = t.size - 1 if hi is None else hi
    lo = decay_start(t[: hi + 1])
    mask = np.zeros(t.size, dtype=bool)
    mask[lo:hi + 1] = True
    if n_min is not None:
        mask &= n >= n_min
    return mask & np.isfinite(t) & (t > 0)


def fit_rate(record: ConvergenceRecord, n_min: float | None = None) -> RateFit:
    """Slopes of ``ln t`` and ``ln |alpha|`` against N on the pre-plateau window."""
    mask = fit_window(record, n_min)
    if mask.sum() < 4:
        raise ValueError("need at least 4 pre-plateau rows to fit a rate")
    n = record.column("N")[mask]
    lt = np.log(record.column("t")[mask])
    la = np.log(record.column("coeff_norm")[mask])
    pt = np.polyfit(n, lt, 1)
    pa = np.polyfit(n, la, 1)
    res = float(np.sqrt(np.mean((np.polyval(pt, n) - lt) ** 2)))
    return RateFit(float(pt[0]), float(pa[0]), (float(n[0]), float(n[-1])), res, int(mask.sum()))


def growth_onset(record: ConvergenceRecord, N: int | None = None, frac: float = 0.9):
    """First R interval where ``|alpha|`` grows at ``frac`` of the ``R**(N/2)`` rate.

    Returns ``(R_lo, R_hi)`` or ``None`` if the local exponent
    ``d ln|alpha| / d ln R`` never reaches ``frac * N / 2``.
    """
    if record.sweep != "R":
        raise ValueError("growth onset needs an R sweep")
    rows = record.ok_rows()
    N = rows[0].N if N is None else N
    R = np.array([r.sweep_var for r in rows])
    la = np.log(np.array([r.coeff_norm for r in rows]))
    rate = np.diff(la) / np.diff(np.log(R))
    hit = np.flatnonzero(rate >= frac * N / 2)
    if hit.size == 0:
        return None
    i = int(hit[0])
    return float(R[i]), float(R[i + 1])


def enclosure_flip(shape: Shape, R_list: Sequence[float], z: complex):
    """First R interval across which ``Gamma_R`` starts to enclose ``z``.

    Returns ``(R_lo, R_hi)`` or ``None``.
    """
    wn = []
    for R in R_list:
        curve = place_annular(shape, 2, R, check=False).curve_samples
        wn.append(abs(float(winding_number(curve, z)[0])) > 0.5)
    for i in range(1, len(wn)):
        if wn[i] != wn[i - 1]:
            return float(R_list[i - 1]), float(R_list[i])
    return None


def write_field_csv(path_or_file, points, values, k: float, N: int, shape_id: str,
                    header_lines: Iterable[str] = ()) -> None:
    own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# k=%.17g N={N} shape={shape_id}\n" % k)
        fh.write("x,y,re_u,im_u\n")
        for z, u in zip(np.ravel(points), np.ravel(values)):
            fh.write("%.17g,%.17g,%.17g,%.17g\n" % (z.real, z.imag, u.real, u.imag))
    finally:
        if own:
            fh.close()
