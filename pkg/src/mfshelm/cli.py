"""Command-line experiment runner.

Subcommands ``solve``, ``sweep``, ``disc-model`` and ``shapes`` read an INI
configuration (see :mod:`mfshelm.config`) and write CSV tables.  Each table
starts with ``# `` comment lines holding the resolved configuration, so a
result file can itself be passed back as ``--config``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bdata import DataEvaluationError
from .config import ConfigError, Experiment, load
from .discmodel import (
    EPS_MACH, PREDICTION_COLUMNS, SPECTRUM_COLUMNS, NoHaltError, ResonanceError, VfundCoeffs,
    predict_curves, predict_halt, prediction_rows, spectrum_rows, write_table,
)
from .geometry import (
    GeometryError, SelfIntersectionWarning, adaptive_curve, boundary_polyline, find_singularities,
)
from .solver import (
    ConvergenceRecord, SolverError, SweepRow, evaluate_field, interior_grid, solve_bvp, sweep_n,
    sweep_r, write_field_csv,
)
from .specialfn import DomainError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NUMERIC_ERRORS = (GeometryError, SolverError, ResonanceError, NoHaltError, DomainError,
                  DataEvaluationError, ArithmeticError, np.linalg.LinAlgError)


class Output:
    """Resolves output paths: ``--out``, else ``$MFS_OUT_DIR/[outputs] dir``."""

    def __init__(self, exp: Experiment, out: str | None):
        if out is not None:
            root = Path(out)
        else:
            root = Path(os.environ.get("MFS_OUT_DIR", "."))
            sub = exp.get("outputs", "dir")
            if sub:
                root = root / sub
        self.root = root
        self.prefix = exp.get("outputs", "prefix", "")
        self.header = exp.header_lines()
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.root / f"{self.prefix}{name}"
        self.written.append(p)
        return p

    def table(self, name: str, columns, rows, extra=()):
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            write_table(fh, columns, rows, [*self.header, *extra])


def _bool(exp: Experiment, section: str, key: str, default=False) -> bool:
    raw = exp.get(section, key)
    if raw is None:
        return default
    if raw.lower() in ("1", "true", "yes", "on"):
        return True
    if raw.lower() in ("0", "false", "no", "off"):
        return False
    raise exp.error(section, key, f"expected a boolean, got {raw!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(exp: Experiment, out: Output, args) -> int:
    cfg = exp.solve_config()
    if cfg.N is None:
        raise exp.error("discretization", "n", "solve needs a basis size N")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SelfIntersectionWarning)
        res = solve_bvp(cfg.shape, cfg.k, cfg.data, cfg.placement, cfg.N, cfg.M, cfg.kernel)
    print(f"t={res.t:.6e} |alpha|={res.coeff_norm:.6e} N={res.N} M={res.M} "
          f"wall={res.wall_time:.3f}s dof_per_wavelength={res.metadata['dof_per_wavelength']:.3f}")
    rec = ConvergenceRecord("N", [SweepRow(float(res.N), res.N, res.M, res.t, res.coeff_norm,
                                           1e3 * res.wall_time)])
    meta = [f"placement {res.metadata['placement']}",
            "dof_per_wavelength=%.17g" % res.metadata["dof_per_wavelength"]]
    with open(out.path("solve.csv"), "w", encoding="utf-8", newline="") as fh:
        rec.write_csv(fh, [*out.header, *meta])
    if _bool(exp, "outputs", "field"):
        spacing = exp.getfloat("outputs", "field_spacing", 0.005)
        if not spacing > 0:
            raise exp.error("outputs", "field_spacing", "must be positive")
        pts = interior_grid(cfg.shape, spacing)
        u = evaluate_field(res.alpha, res.charges, cfg.k, pts, cfg.kernel)
        with open(out.path("field.csv"), "w", encoding="utf-8", newline="") as fh:
            write_field_csv(fh, pts, u, cfg.k, cfg.N, cfg.shape.kind, out.header)
    return EXIT_OK


def cmd_sweep(exp: Experiment, out: Output, args) -> int:
    cfg = exp.solve_config()
    n_list = exp.getlist("discretization", "n_list", int)
    r_list = exp.getlist("discretization", "r_list", float)
    if (n_list is None) == (r_list is None):
        raise exp.error("discretization", None, "a sweep needs exactly one of N_list or R_list")
    if n_list is not None:
        if not n_list:
            raise exp.error("discretization", "n_list", "empty N list")
        if n_list != sorted(n_list):
            raise exp.error("discretization", "n_list", "N list must be ascending")
        rec = sweep_n(cfg, n_list, jobs=args.jobs)
    else:
        if not r_list:
            raise exp.error("discretization", "r_list", "empty R list")
        if r_list != sorted(r_list):
            raise exp.error("discretization", "r_list", "R list must be ascending")
        if cfg.N is None:
            raise exp.error("discretization", "n", "an R sweep needs a fixed N")
        rec = sweep_r(cfg, r_list, jobs=args.jobs)
    with open(out.path("sweep.csv"), "w", encoding="utf-8", newline="") as fh:
        rec.write_csv(fh, out.header)
    ok = rec.ok_rows()
    if not ok:
        print("every sweep row failed", file=sys.stderr)
        return EXIT_NUMERIC
    f = rec.fitted_rate
    fit = "" if f is None else f" t_slope={f.t_slope:.6g} coeff_slope={f.coeff_slope:.6g}"
    print(f"{len(ok)}/{len(rec.rows)} rows; min t={min(r.t for r in ok):.3e}{fit}")
    return EXIT_OK


def cmd_disc_model(exp: Experiment, out: Output, args) -> int:
    shape_kind = exp.get("shape", "kind", "disc")
    if shape_kind != "disc":
        raise exp.error("shape", "kind", "disc-model applies to the disc only")
    k = exp.k()
    eps = exp.getfloat("model", "eps", EPS_MACH)
    if not 0 < eps < 1:
        raise exp.error("model", "eps", "eps must lie in (0, 1)")
    extra = ["eps=%.17g" % eps]
    rho_list = exp.getlist("model", "rho_list", float)
    R_grid = exp.getlist("model", "r_list", float)
    if rho_list is not None or R_grid is not None:
        if not rho_list or not R_grid:
            raise exp.error("model", "rho_list", "R-sweep mode needs both rho_list and R_list")
        pairs = [(rho, R) for rho in rho_list for R in R_grid]
        out.table("prediction.csv", PREDICTION_COLUMNS, prediction_rows(k, pairs, eps=eps), extra)
        print(f"{len(pairs)} predictions written")
        return EXIT_OK
    R = exp.getfloat("placement", "r", 1.5)
    if exp.has("data", "data"):
        data = exp.data()
        cmap = data.coeff_map(k)
        rho = cmap.rho
    else:
        rho = exp.getfloat("model", "rho")
        if rho is None:
            raise exp.error("model", "rho", "disc-model needs rho or a [data] section")
        cmap = VfundCoeffs(k, rho)
    m_max = exp.getint("model", "m_max", int(max(200, 4 * k)))
    out.table("spectrum.csv", SPECTRUM_COLUMNS, spectrum_rows(k, R, range(m_max + 1)),
              ["k=%.17g R=%.17g" % (k, R), *extra])
    pred = predict_halt(k, R, cmap, eps=eps, rho=rho)
    out.table("prediction.csv", PREDICTION_COLUMNS, [(rho, R, pred.N0, math.log10(pred.t0))], extra)
    n_list = exp.getlist("model", "n_list", int)
    if n_list:
        if any(n < 2 or n % 2 for n in n_list):
            raise exp.error("model", "n_list", "predicted curves need even N >= 2")
        t_ex, a_ex = predict_curves(n_list, k, R, cmap, "exact")
        t_un, a_un = predict_curves(n_list, k, R, cmap, "uniform")
        rows = list(zip(n_list, t_ex, a_ex, t_un, a_un))
        out.table("predicted_curves.csv", ("N", "t_exact", "alpha_exact", "t_uniform", "alpha_uniform"),
                  rows, extra)
    print(f"N0={pred.N0} t0={pred.t0:.3e} eps={eps:g}")
    return EXIT_OK


def cmd_shapes(exp: Experiment, out: Output, args) -> int:
    shape = exp.shape()
    n = 1024
    s = 2 * np.pi * np.arange(n) / n
    z = boundary_polyline(shape, n)
    out.table("boundary.csv", ("s", "x", "y"), list(zip(s, z.real, z.imag)))
    sings = find_singularities(shape)
    rows = [(x.kind, int(x.exterior), x.s_location.real, x.s_location.imag, x.z_location.real,
             x.z_location.imag, x.w_location.real, x.w_location.imag) for x in sings]
    out.table("singularities.csv", ("kind", "exterior", "s_re", "s_im", "z_re", "z_im", "w_re", "w_im"),
              rows)
    k = exp.k(required=False)
    n_ext = sum(x.exterior and x.tau > 0 for x in sings)
    if k is not None:
        pl = exp.placement()
        curve = adaptive_curve(shape, k, beta=pl.beta, gamma=pl.gamma, dmax_override=pl.dmax,
                               rule=pl.dmax_rule)
        chi = 2 * np.pi * np.arange(n) / n
        y = curve(chi)
        lim = np.abs(shape.deriv(chi)) / curve.dmax
        pts = curve.points(chi)
        out.table("adaptive_curve.csv", ("chi", "y", "dist_term", "x", "y_z"),
                  list(zip(chi, y, lim, pts.real, pts.imag)), ["k=%.17g dmax=%.17g" % (k, curve.dmax)])
    print(f"{shape.kind}: {len(sings)} singularities, {n_ext} exterior")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "disc-model": cmd_disc_model, "shapes": cmd_shapes}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfshelm", description="MFS Helmholtz experiment runner")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="INI file or a result CSV with embedded config")
        sp.add_argument("--out", default=None, help="output directory (overrides MFS_OUT_DIR)")
        sp.add_argument("--jobs", type=int, default=1, help="concurrent sweep rows")
        sp.add_argument("--eps", type=float, default=None, help="machine epsilon for halting predictions")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = load(args.config)
        if args.eps is not None:
            if not exp.parser.has_section("model"):
                exp.parser.add_section("model")
            exp.parser.set("model", "eps", repr(float(args.eps)))
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        out = Output(exp, args.out)
        return COMMANDS[args.command](exp, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
