"""Regenerate tests/data/oracle_values.json from the scalar oracle.

Run from the repository root:  python tests/make_oracle_values.py
The package is never imported here.
"""
import json
import math
from pathlib import Path

import oracle as o

CO, CE = o.KATO_O, o.KATO_E
CUT = math.radians(29.3)
L = 0.5e-3
PUMP = 0.405
W0 = o.omega_of(0.810)


def phase(tx, ty=0.0, pump_phase=0.0, w1=W0, w2=None, model="exact"):
    f = o.relative_phase_exact if model == "exact" else o.relative_phase_quadratic
    return f(CO, CE, CUT, L, PUMP, pump_phase, tx, ty, w1, w2)


def annulus_gap(cone, half_width, n):
    """Max |exact - quadratic| on the n x n square grid masked to the annulus."""
    ext = cone + half_width
    axis = [-ext + 2 * ext * i / (n - 1) for i in range(n)]
    gap = 0.0
    for ty in axis:
        for tx in axis:
            polar = math.atan(math.hypot(math.tan(tx), math.tan(ty)))
            if abs(polar - cone) <= half_width:
                gap = max(gap, abs(phase(tx, ty) - phase(tx, ty, model="quadratic")))
    return gap


def delay(tx, ty=0.0):
    """d(theta)/d(omega_1) at fixed omega_2 via Richardson-extrapolated central differences."""
    w2 = o.omega_of(PUMP) - W0

    def d(h):
        return (phase(tx, ty, w1=W0 + h, w2=w2) - phase(tx, ty, w1=W0 - h, w2=w2)) / (2 * h)

    h = 1e-4 * W0
    return (4 * d(h / 2) - d(h)) / 3


def iris_average(center_tx, pump_phase, iris=2e-3, dist=0.5, nr=120, nphi=180):
    """Midpoint-rule average of exp(i theta) and cos(theta) over the iris disc."""
    xc = dist * math.tan(center_tx)
    r0 = iris / 2
    sre = sim = sc = wsum = 0.0
    for i in range(nr):
        r = r0 * (i + 0.5) / nr
        for j in range(nphi):
            a = 2 * math.pi * (j + 0.5) / nphi
            x, y = xc + r * math.cos(a), r * math.sin(a)
            t = phase(math.atan(x / dist), math.atan(y / dist), pump_phase)
            sre += r * math.cos(t)
            sim += r * math.sin(t)
            sc += r * math.cos(t)
            wsum += r
    return math.hypot(sre, sim) / wsum, abs(sc) / wsum


def first_sinc_zero(cone):
    """Outer angle where dk_ooe * L = 2 pi, by dense scan plus bisection."""
    wp = o.omega_of(PUMP)
    w = wp / 2

    def g(t):
        q = o.angles_to_q(w, t, 0.0)
        return o.mismatch_ooe(CO, CE, CUT, "H", wp, w, w, q, (-q[0], -q[1])) * L - 2 * math.pi

    t_prev, g_prev = cone + 1e-6, g(cone + 1e-6)
    step = math.radians(0.001)
    t = t_prev
    while True:
        t += step
        gt = g(t)
        if (gt > 0) != (g_prev > 0):
            break
        t_prev, g_prev = t, gt
    lo, hi = t_prev, t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (g_prev > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    k810 = W0 / o.C
    q3 = k810 * math.tan(math.radians(3.0))
    wp = o.omega_of(PUMP)
    w = wp / 2
    cone = o.cone_angle(CO, CE, CUT, PUMP)
    lock = phase(cone)
    positions = [2.7, 3.0, 3.3, 3.45, 3.6]
    v_re, v_fixed = iris_average(math.radians(3.6), lock)
    values = {
        "n_o_810": o.sellmeier(CO, 0.810),
        "n_o_405": o.sellmeier(CO, 0.405),
        "n_e_810": o.sellmeier(CE, 0.810),
        "n_e_405": o.sellmeier(CE, 0.405),
        "n_e_perp_405_cut29.3": o.n_e_perp(CO, CE, CUT, 0.405),
        "walkoff_810_cut29.3_rad": o.walkoff(CO, CE, CUT, 0.810),
        "kappa_o_810_q3deg": o.kappa_o(CO, W0, q3, 0.0),
        "kappa_eH_810_q3deg": o.kappa_e(CO, CE, CUT, "H", W0, q3, 0.0),
        "dk_ooe_collinear": o.mismatch_ooe(CO, CE, CUT, "H", wp, w, w, (0.0, 0.0), (0.0, 0.0)),
        "dk_eeo_collinear": o.mismatch_eeo(CO, CE, CUT, "H", wp, w, w, (0.0, 0.0), (0.0, 0.0)),
        "cone_angle_rad": cone,
        "phase_exact_3deg": phase(math.radians(3.0)),
        "phase_quadratic_3deg": phase(math.radians(3.0), model="quadratic"),
        "phase_exact_positions": [phase(math.radians(p)) for p in positions],
        "max_gap_annulus_256": annulus_gap(cone, math.radians(1.0), 256),
        "delay_cone_s": delay(cone),
        "uncompensated_visibility_3.6deg": v_re,
        "uncompensated_visibility_3.6deg_locked_fixed": v_fixed,
        "first_sinc_zero_outer_rad": first_sinc_zero(cone),
    }
    out = Path(__file__).with_name("data") / "oracle_values.json"
    out.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    for k, v in sorted(values.items()):
        print(k, v)


if __name__ == "__main__":
    main()
