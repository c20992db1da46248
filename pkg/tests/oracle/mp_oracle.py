"""50-digit mpmath reference computations.

Nothing here imports the package under test.
"""

from __future__ import annotations

import json
import sys

import mpmath as mp

mp.mp.dps = 50

DIGITS = 25
GRID_M = (0, 1, 2, 5, 10, 25, 50, 100)
GRID_X = (0.5, 2.0, 7.5, 30.0, 120.0)


def s(x) -> str:
    return mp.nstr(mp.mpf(x), DIGITS)


def J(m, x):
    return mp.besselj(m, mp.mpf(x))


def Y(m, x):
    return mp.bessely(m, mp.mpf(x))


def log_abs(v):
    return mp.log(abs(v))


def iax(a, x):
    a, x = mp.mpf(a), mp.mpf(x)
    r = mp.sqrt(a * a - x * x)
    return r - a * mp.log((a + r) / x)


def s_hat(m, k, R):
    """(i pi / 2) H_m(kR) J_m(k)."""
    kR = mp.mpf(k) * mp.mpf(R)
    h = J(m, kR) + 1j * Y(m, kR)
    return 1j * mp.pi / 2 * h * J(m, k)


def vfund(m, k, rho):
    """Unit-circle Fourier coefficient of -(1/4) Y0(k |z - rho|)."""
    return -Y(m, mp.mpf(k) * mp.mpf(rho)) * J(m, k) / 4


def halt_scan(k, R, rho, eps=mp.mpf("1e-16")):
    """Smallest even N with N/2 >= k and sqrt(N)|s(N/2)| <= eps; t0 = |v(N0/2)|."""
    m = int(mp.ceil(k))
    while True:
        N = 2 * m
        if mp.sqrt(N) * abs(s_hat(m, k, R)) <= eps:
            return N, abs(vfund(m, k, rho))
        m += 1


def triangle_perimeter(a1):
    a1 = mp.mpf(a1)
    f = lambda t: abs(1j * mp.expj(t) - 2j * a1 * mp.expj(-2 * t))
    return mp.quad(f, mp.linspace(0, 2 * mp.pi, 7))


def build() -> dict:
    out = {}
    out["J5_2"] = s(J(5, 2))
    out["Y0_2"] = s(Y(0, 2))
    h = J(3, 10) + 1j * Y(3, 10)
    out["H3_10"] = [s(h.real), s(h.imag)]
    out["J_grid"] = {f"{m},{x}": s(J(m, x)) for m in GRID_M for x in GRID_X}
    out["Y_grid"] = {f"{m},{x}": s(Y(m, x)) for m in GRID_M for x in GRID_X}
    out["logJ_1500_500"] = s(log_abs(J(1500, 500)))
    out["logY_1500_625"] = s(log_abs(Y(1500, 625)))
    out["logJ_3000_600"] = s(log_abs(J(3000, 600)))
    out["logY_3000_600"] = s(log_abs(Y(3000, 600)))
    out["Y50_2"] = s(Y(50, 2))
    out["logJ_200_1"] = s(log_abs(J(200, 1)))
    out["J100_50"] = s(J(100, 50))
    out["Y10_5"] = s(Y(10, 5))
    out["iax_1500_500"] = s(iax(1500, 500))
    sh = s_hat(10, 5, 1.5)
    out["s_hat_10_5_1.5"] = [s(sh.real), s(sh.imag)]
    out["log_s_hat_k20_R1.5"] = {str(m): s(log_abs(s_hat(m, 20, 1.5))) for m in range(1, 201)}
    out["log_s_hat_k500_R1.25"] = {str(m): s(log_abs(s_hat(m, 500, 1.25)))
                                  for m in range(635, 1251, 25)}
    out["s_hat_k1e-4_R1.5"] = {str(m): s(abs(s_hat(m, mp.mpf("1e-4"), 1.5))) for m in range(1, 21)}
    out["vfund_k8_rho1.2"] = {str(m): s(vfund(m, 8, 1.2)) for m in (0, 1, 5, 20, 50, 100)}
    halts = {}
    for k, R, rho in ((8, 1.5, 1.2), (500, 1.2, 1.1), (500, 1.05, 1.01)):
        N0, t0 = halt_scan(k, R, rho)
        halts[f"{k},{R},{rho}"] = [str(N0), s(t0)]
    out["halt"] = halts
    out["triangle_perimeter_0.3"] = s(triangle_perimeter(0.3))
    return out


if __name__ == "__main__":
    from pathlib import Path

    path = Path(__file__).with_name("frozen.json")
    data = build()
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}", file=sys.stderr)
