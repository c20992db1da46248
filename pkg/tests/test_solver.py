import io
import math

import numpy as np
import pytest
from scipy import special

from mfshelm.bdata import constant, fundamental
from mfshelm.discmodel import VfundCoeffs, diagonal_solve
from mfshelm.geometry import (
    boundary_nodes, crescent, disc, exterior_singularities, place_disc, rounded_triangle,
)
from mfshelm.solver import (
    ConvergenceRecord, Kernel, Placement, SolveConfig, SweepRow, assemble,
    boundary_error, convergence_onset, decay_start, default_M, detect_plateau, enclosure_flip,
    evaluate_field, fit_rate, growth_onset, interior_grid, least_squares, solve_bvp, sweep_n,
    sweep_r, write_field_csv,
)

DISC = Placement("disc-circle", 1.5)


def disc_config(rho, R=1.5, M=240):
    return SolveConfig(disc(), 8.0, fundamental(rho), Placement("disc-circle", R), M)


def synthetic(t, coeff=None):
    coeff = np.ones_like(t) if coeff is None else coeff
    rows = [SweepRow(float(n), int(n), 2 * int(n), float(a), float(c), 0.0)
            for n, a, c in zip(range(10, 10 + 2 * len(t), 2), t, coeff)]
    return ConvergenceRecord("N", rows)


# -- matrix and least squares --------------------------------------------------------

def test_single_entry():
    A = assemble(np.array([1.0 + 0j]), np.array([2.0 + 0j]), 8.0)
    assert A[0, 0] == pytest.approx(0.25j * special.hankel1(0, 8.0), rel=1e-15)


def test_mixed_kernel():
    A = assemble(np.array([1.0 + 0j]), np.array([2.0 + 0j]), 8.0, Kernel("y0-mixed", 1.0))
    assert A[0, 0] == pytest.approx(0.25j * (special.y0(8.0) + 1j * special.j0(8.0)), rel=1e-15)
    with pytest.raises(ValueError):
        Kernel("laplace")


def test_disc_rotational_symmetry():
    N, M = 16, 48
    nodes = boundary_nodes(disc(), M)
    A = assemble(nodes, place_disc(N, 1.5), 8.0)
    r = M // N
    np.testing.assert_allclose(A[r:, 1:], A[:-r, :-1], atol=1e-14)


def test_consistent_system():
    nodes = boundary_nodes(disc(), 120)
    A = assemble(nodes, place_disc(40, 1.5), 5.0)
    v = A[:, 0].copy()
    alpha = least_squares(A, v, nodes.weights)
    e1 = np.zeros(40)
    e1[0] = 1
    np.testing.assert_allclose(alpha, e1, atol=1e-8)
    assert boundary_error(A, alpha, v, nodes.weights) < 1e-12


def test_square_equal_weights_is_plain_solve():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    v = rng.normal(size=12) + 0j
    np.testing.assert_allclose(least_squares(A, v, np.full(12, 0.3)), np.linalg.solve(A, v), rtol=1e-10)
    with pytest.raises(ValueError):
        least_squares(A[:5], v[:5])


def test_default_M():
    assert default_M(160, 8) == 240
    assert default_M(1000, 500) == 4000


# -- solve_bvp ------------------------------------------------------------------------

def test_disc_weights_formula():
    res = solve_bvp(disc(), 8.0, fundamental(1.2), DISC, 40, 240)
    assert res.t == pytest.approx(math.sqrt(2 * math.pi / 240) * np.linalg.norm(res.residual_samples), rel=1e-14)


@pytest.mark.parametrize("shape, placement, data", [
    (disc(), DISC, fundamental(1.2)),
    (rounded_triangle(), Placement("annular", 1.3), constant(1.0)),
    (crescent(), Placement("adaptive"), constant(1.0)),
])
def test_residual_recomputation(shape, placement, data):
    res = solve_bvp(shape, 3.0, data, placement, 60)
    assert res.recompute_t(shape, 3.0, data) == pytest.approx(res.t, rel=1e-12)
    assert res.alpha.shape == (60,) and res.residual_samples.shape == (res.M,)
    assert res.coeff_norm == pytest.approx(np.linalg.norm(res.alpha))
    assert res.metadata["dof_per_wavelength"] > 0


def test_fig_udisc_residual_structure():
    res = solve_bvp(disc(), 8.0, fundamental(1.2), Placement("disc-circle", 1.4), 80, 240)
    r = res.residual_samples
    th = 2 * np.pi * np.arange(1, 241) / 240
    near = np.abs(np.angle(np.exp(1j * th))) < np.pi / 4
    assert np.abs(r[near]).max() > 10 * np.abs(r[~near & (np.abs(np.angle(-np.exp(1j * th))) < np.pi / 4)]).max()
    spect = np.abs(np.fft.fft(r))
    freq = np.abs(np.fft.fftfreq(240, 1 / 240))
    assert abs(freq[np.argmax(spect)] - 40) <= 4


def test_least_squares_matches_diagonal_solve():
    for N in (40, 60, 80):
        res = solve_bvp(disc(), 8.0, fundamental(3.0), DISC, N, 240)
        d = diagonal_solve(N, 8.0, 1.5, VfundCoeffs(8.0, 3.0))
        assert res.t / d.t == pytest.approx(1.0, rel=1e-2)


def test_least_squares_floor_below_diagonal_model():
    # the diagonal model has no round-off; least squares stops near 1e-16
    res = solve_bvp(disc(), 8.0, fundamental(3.0), DISC, 120, 240)
    d = diagonal_solve(120, 8.0, 1.5, VfundCoeffs(8.0, 3.0))
    assert d.t < 1e-20 and 1e-17 < res.t < 1e-15


def test_solve_validation():
    with pytest.raises(ValueError):
        solve_bvp(disc(), 8.0, constant(), DISC, 40, 20)


# -- field evaluation ---------------------------------------------------------------------

def test_field_single_charge():
    y = np.array([2.0 + 0j])
    x = np.array([0.3 + 0.1j, -0.5j])
    u = evaluate_field(np.array([1.0]), y, 8.0, x)
    np.testing.assert_allclose(u, 0.25j * special.hankel1(0, 8 * np.abs(x - 2)), rtol=1e-14)
    assert np.isnan(evaluate_field(np.array([1.0]), y, 8.0, y)[0])


def test_field_linearity():
    rng = np.random.default_rng(1)
    y = place_disc(20, 1.5).points
    a1, a2 = rng.normal(size=(2, 20)) + 0j
    x = 0.5 * np.exp(1j * np.linspace(0, 6, 9))
    lhs = evaluate_field(a1 + a2, y, 4.0, x)
    rhs = evaluate_field(a1, y, 4.0, x) + evaluate_field(a2, y, 4.0, x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_interior_error_decays_inward():
    k, rho = 8.0, 1.2
    res = solve_bvp(disc(), k, fundamental(rho), Placement("disc-circle", 1.4), 80, 240)
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)

    def err(r):
        x = r * np.exp(1j * th)
        return np.abs(evaluate_field(res.alpha, res.charges, k, x) + 0.25 * special.y0(k * np.abs(x - rho))).max()

    assert err(0.5) < 1e-2 * err(0.9)


def test_interior_grid_and_field_csv():
    pts = interior_grid(disc(), 0.25)
    assert np.all(np.abs(pts) < 1)
    buf = io.StringIO()
    write_field_csv(buf, pts[:3], np.ones(3, complex), 8.0, 40, "disc", ["cfg"])
    lines = buf.getvalue().splitlines()
    assert lines[:3] == ["# cfg", "# k=8 N=40 shape=disc", "x,y,re_u,im_u"] and len(lines) == 6


# -- rate fitting and plateaus ----------------------------------------------------------------

def test_fit_rate_synthetic():
    N = np.arange(10, 90, 2)
    rec = synthetic(2.0 ** -N.astype(float))
    f = fit_rate(rec)
    assert f.t_slope == pytest.approx(-math.log(2), abs=1e-6)
    assert f.coeff_slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_rate(synthetic(np.array([1.0, 0.5, 0.2])))


def test_detect_plateau_rules():
    t = np.r_[np.geomspace(1, 1e-10, 20), np.full(10, 1e-10) * (1 + 0.1 * np.sin(np.arange(10)))]
    i = detect_plateau(t, np.ones_like(t) * 1e5)
    assert 18 <= i <= 21
    # the gate ignores stalls far above the round-off level of the coefficients
    assert detect_plateau(t, np.ones_like(t) * 1e-5) is None
    assert detect_plateau(np.geomspace(1, 1e-5, 20)) is None


def test_onset_and_decay_start():
    t = np.r_[np.full(5, 0.5), 0.8, 0.6, np.geomspace(0.5, 1e-8, 10)]
    peak, drop = convergence_onset(t)
    assert peak == 5
    assert decay_start(t) == 5


def test_sweep_order_and_threads():
    cfg = disc_config(1.8)
    a = sweep_n(cfg, list(range(20, 61, 4)))
    b = sweep_n(cfg, list(range(20, 61, 4)), jobs=4)
    assert a.column("t") == pytest.approx(b.column("t"), rel=1e-12)
    assert [r.N for r in b.rows] == list(range(20, 61, 4))
    with pytest.raises(ValueError):
        sweep_n(cfg, [40, 20])
    with pytest.raises(ValueError):
        sweep_n(cfg, [])


def test_sweep_records_failures():
    cfg = SolveConfig(disc(), 8.0, fundamental(1.8), Placement("disc-circle", 1.5), 240)
    rec = sweep_r(cfg, [0.9, 1.5], N=40)
    assert rec.rows[0].error is not None and rec.rows[1].error is None
    buf = io.StringIO()
    rec.write_csv(buf, ["hdr"])
    text = buf.getvalue()
    assert "# error at 0.9" in text
    assert "sweep_var,N,M,t,coeff_norm,wall_ms" in text


@pytest.mark.parametrize("rho", [3.0, 1.8, 1.2])
def test_monotone_pre_plateau_decay(rho):
    rec = sweep_n(disc_config(rho), list(range(20, 241, 2)))
    t = rec.column("t")
    hi = rec.plateau_index
    lo = decay_start(t[: hi + 1])
    seg = t[lo:hi + 1]
    assert np.all(seg[1:] <= 1.05 * seg[:-1])
    assert lo <= 3


def test_disc_sweep_r_growth_onset():
    rho = 1.2
    Rs = list(np.round(np.arange(1.05, 1.501, 0.025), 4))
    rec = sweep_r(SolveConfig(disc(), 8.0, fundamental(rho), Placement("disc-circle"), 300), Rs, N=200)
    norms = rec.column("coeff_norm")
    R = rec.column("sweep_var")
    below = norms[R < rho]
    assert below.max() / below.min() < 10
    lo, hi = growth_onset(rec)
    assert 0.95 * rho <= hi and lo <= 1.2 * rho


def test_enclosure_flip_crescent():
    z = exterior_singularities(crescent())[0].z_location
    Rs = np.round(np.arange(1.02, 1.61, 0.02), 4)
    lo, hi = enclosure_flip(crescent(), Rs, z)
    assert lo < 1 / 0.9 < hi
    assert enclosure_flip(crescent(), [1.02, 1.05], z) is None
