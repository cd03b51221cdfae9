"""Acceptance criteria 1-9, each printing a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest
from scipy.constants import c as C

import oracle
from spdc_slm import (
    AxisPlane,
    CrystalSpec,
    EmissionAngles,
    EmissionGrid,
    Fringe,
    Material,
    PlaneWaveMode,
    Projector,
    Sellmeier,
    SlmSpec,
    angle_to_pixel,
    calibrate_lut,
    compensation_pattern,
    coincidence_density,
    degenerate_cone_angle,
    index_e_perp,
    index_extraordinary_principal,
    index_ordinary,
    kappa_extraordinary,
    kappa_ordinary,
    mismatch_eeo,
    mismatch_ooe,
    panel_coverage,
    panel_grid,
    pair_density,
    default_source,
    pixel_to_angles,
    predicted_visibility_after,
    profile_fwhm,
    radial_scan,
    recompute_residual,
    relative_phase_exact,
    relative_phase_map,
    relative_phase_quadratic,
    time_delay_map,
    uncompensated_visibility,
    visibility,
    wavelength_to_omega,
)

SIX_DEG = np.array([2.4, 2.7, 3.0, 3.3, 3.45, 3.6])
FIVE_DEG = np.array([2.7, 3.0, 3.3, 3.45, 3.6])


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def annulus(cone):
    return EmissionGrid.annulus(cone, math.radians(1.0), 256)


@pytest.fixture(scope="module")
def slm_setup(locked, cone):
    slm = SlmSpec()
    center = EmissionAngles(cone, 0.0)
    grid = panel_grid(slm, center)
    grid = grid.with_mask(np.abs(grid.polar_angle() - cone) <= math.radians(1.0))
    phase_map = relative_phase_map(locked, grid, "exact")
    return slm, center, phase_map, compensation_pattern(phase_map, slm, center)


def test_criterion_1_cone_geometry(report):
    src = default_source()
    t0 = time.perf_counter()
    cone = degenerate_cone_angle(src.crystal_H, src.pump_wavelength)
    dt = time.perf_counter() - t0
    deg = math.degrees(cone)
    ok = abs(deg - 3.0) <= 0.5 and dt < 1.0
    report(1, "cone geometry", ok, f"half-opening {deg:.4f} deg (3.0 +- 0.5), {dt * 1e3:.1f} ms (< 1 s)")


def test_criterion_2_time_delay_flatness(report, source, annulus):
    t0 = time.perf_counter()
    d = time_delay_map(source, annulus).masked_values
    dt = time.perf_counter() - t0
    mean = d.mean()
    spread = (d.max() - d.min()) / mean
    ok = abs(mean - 200e-15) <= 50e-15 and spread < 0.10 and dt < 10.0
    report(
        2,
        "time-delay flatness",
        ok,
        f"mean {mean * 1e15:.2f} fs (200 +- 50), (max-min)/mean {spread:.4f} (< 0.10), {dt:.2f} s on 256x256 (< 10 s)",
    )


def test_criterion_3_quadratic_adequacy(report, source, cone, annulus, oracle_values):
    gap = relative_phase_map(source, annulus, "exact") - relative_phase_map(source, annulus, "quadratic")
    worst = float(np.abs(gap.masked_values).max())
    pinned = oracle_values["max_gap_annulus_256"]
    tx = np.linspace(cone - math.radians(1), cone + math.radians(1), 201)
    values = relative_phase_exact(source, EmissionAngles(tx, np.zeros_like(tx)))
    fit = np.polyval(np.polyfit(tx, values, 2), tx)
    r2 = 1 - np.sum((values - fit) ** 2) / np.sum((values - values.mean()) ** 2)
    ok = worst <= pinned + 1e-9 and r2 > 0.999
    report(3, "quadratic-model adequacy", ok, f"max gap {worst:.6e} rad (pinned {pinned:.6e} + 1e-9), radial R^2 {r2:.8f} (> 0.999)")


def test_criterion_4_projection_width_ordering(report, locked, cone):
    dense_deg = math.degrees(cone) + np.linspace(-1.5, 1.5, 121)
    deg = np.concatenate([SIX_DEG, dense_deg])
    pos = EmissionAngles(np.radians(deg), np.zeros_like(deg))
    pp = radial_scan(locked, Projector.PP, pos)
    hh = radial_scan(locked, Projector.HH, pos)
    n = SIX_DEG.size
    w_pp = profile_fwhm(deg[n:], pp[n:])
    w_hh = profile_fwhm(deg[n:], hh[n:])

    def spread(y):
        peak = SIX_DEG[np.argmax(y)]
        return np.sum(y * (SIX_DEG - peak) ** 2) / np.sum(y)

    ok = w_hh > w_pp and spread(hh[:n]) > spread(pp[:n])
    report(
        4,
        "projection width ordering",
        ok,
        f"FWHM HH {w_hh:.4f} deg > PP {w_pp:.4f} deg; six-point spread HH {spread(hh[:n]):.4f} > PP {spread(pp[:n]):.4f} deg^2",
    )


def test_criterion_5_pattern_quantization(report, slm_setup):
    slm, center, phase_map, pattern = slm_setup
    worst = pattern.residual_stats["max"]
    again = recompute_residual(pattern, phase_map)
    bit_equal = np.array_equal(again, pattern.residual, equal_nan=True)
    ok = worst <= np.pi / 255 and bit_equal
    report(
        5,
        "pattern quantization",
        ok,
        f"max residual {worst:.12e} rad (<= pi/255 = {np.pi / 255:.12e}) over {pattern.residual_stats['pixels']} pixels, "
        f"recompute bit-equal {bit_equal}",
    )


def test_criterion_6_coverage_geometry(report, cone):
    cov = panel_coverage(SlmSpec(), cone, EmissionAngles(cone, 0.0))
    ok = abs(cov["sector_deg"] - 57.0) <= 3.0 and abs(cov["fraction"] - 1 / 3) <= 0.03
    report(6, "coverage geometry", ok, f"sector {cov['sector_deg']:.2f} deg (57 +- 3), fraction {cov['fraction']:.4f} (1/3 +- 0.03)")


def test_criterion_7_visibility_restoration(report, slm_setup):
    slm, center, phase_map, pattern = slm_setup
    pos = EmissionAngles(np.radians(FIVE_DEG), np.zeros(FIVE_DEG.size))
    after = predicted_visibility_after(phase_map, pattern, pos, iris=2e-3, distance=0.5)
    before = uncompensated_visibility(phase_map, pos, iris=2e-3, distance=0.5)
    ok = bool(np.all(after >= 0.97) and np.all(after > before))
    table = ", ".join(f"{t:g}: {b:.4f}->{a:.6f}" for t, b, a in zip(FIVE_DEG, before, after))
    report(7, "visibility restoration", ok, f"before->after {table} (after >= 0.97 and > before)")


def _random_case(rng):
    co = (rng.uniform(2.6, 2.9), rng.uniform(0.015, 0.022), rng.uniform(0.015, 0.021), rng.uniform(0.01, 0.016))
    ce = (rng.uniform(2.3, 2.45), rng.uniform(0.010, 0.014), rng.uniform(0.015, 0.018), rng.uniform(0.012, 0.018))
    return Material("random", Sellmeier(*co), Sellmeier(*ce), (0.22, 1.5)), co, ce


def test_criterion_8_oracle_equivalence(report, rng):
    worst = {"indices": 0.0, "kappa": 0.0, "mismatch": 0.0, "exact": 0.0, "quadratic": 0.0}

    def rel(a, b, scale=None):
        return abs(a - b) / abs(scale if scale is not None else b)

    for _ in range(100):
        m, co, ce = _random_case(rng)
        cut_deg = rng.uniform(25, 40)
        cut = math.radians(cut_deg)
        length = rng.uniform(0.1e-3, 2e-3)
        wl = rng.uniform(0.3, 1.0)
        c_h = CrystalSpec(m, cut, length, AxisPlane.HORIZONTAL_XZ)
        worst["indices"] = max(
            worst["indices"],
            rel(index_ordinary(m, wl), oracle.sellmeier(co, wl)),
            rel(index_extraordinary_principal(m, wl), oracle.sellmeier(ce, wl)),
            rel(index_e_perp(c_h, wl), oracle.n_e_perp(co, ce, cut, wl)),
        )

        w = float(wavelength_to_omega(wl))
        qx, qy = rng.uniform(-0.08, 0.08, 2) * w / C
        mode = PlaneWaveMode(w, qx, qy)
        worst["kappa"] = max(worst["kappa"], rel(kappa_ordinary(mode, m), oracle.kappa_o(co, w, qx, qy)))
        for c, tag in ((c_h, "H"), (c_h.rotated(), "V")):
            worst["kappa"] = max(worst["kappa"], rel(kappa_extraordinary(mode, c), oracle.kappa_e(co, ce, cut, tag, w, qx, qy)))

        wp = float(wavelength_to_omega(0.405))
        w1 = wp * rng.uniform(0.45, 0.55)
        q1 = tuple(rng.uniform(-0.07, 0.07, 2) * w1 / C)
        modes = PlaneWaveMode(wp), PlaneWaveMode(w1, *q1), PlaneWaveMode(wp - w1, -q1[0], -q1[1])
        # a difference of wavevectors is only defined to rounding of the terms subtracted
        scale = oracle.kappa_o(co, wp, 0.0, 0.0)
        for c, tag in ((c_h, "H"), (c_h.rotated(), "V")):
            ref_ooe = oracle.mismatch_ooe(co, ce, cut, tag, wp, w1, wp - w1, q1, (-q1[0], -q1[1]))
            ref_eeo = oracle.mismatch_eeo(co, ce, cut, tag, wp, w1, wp - w1, q1, (-q1[0], -q1[1]))
            worst["mismatch"] = max(
                worst["mismatch"], rel(mismatch_ooe(c, *modes), ref_ooe, scale), rel(mismatch_eeo(c, *modes), ref_eeo, scale)
            )

        phi = rng.uniform(-3, 3)
        cfg = default_source(cut_deg, length, 0.405, m, pump_phase=phi)
        tx, ty = rng.uniform(-0.08, 0.08, 2)
        ws = cfg.degenerate_omega * rng.uniform(0.98, 1.02)
        a = EmissionAngles(tx, ty)
        ref = oracle.relative_phase_exact(co, ce, cut, length, 0.405, phi, tx, ty, ws)
        ref_q = oracle.relative_phase_quadratic(co, ce, cut, length, 0.405, phi, tx, ty, ws)
        worst["exact"] = max(worst["exact"], rel(float(relative_phase_exact(cfg, a, ws)), ref))
        worst["quadratic"] = max(worst["quadratic"], rel(float(relative_phase_quadratic(cfg, a, ws)), ref_q))

    ok = all(v <= 1e-12 for v in worst.values())
    report(8, "oracle equivalence", ok, "worst relative error over 100 inputs: " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def test_criterion_9_invariant_suite(report, source, locked, cone, rng):
    failures = []

    phi = rng.uniform(0, 2 * np.pi, 60)
    r = cone + rng.uniform(-0.015, 0.015, 60)
    ring = EmissionAngles(r * np.cos(phi), r * np.sin(phi))

    # projection sum rule
    parts = sum(coincidence_density(locked, p, ring) for p in (Projector.HH, Projector.HV, Projector.VH, Projector.VV))
    if not np.allclose(parts, pair_density(locked, ring), rtol=1e-9):
        failures.append("sum rule")

    # pump-phase linearity
    deltas = rng.uniform(-20, 20, 60)
    base = relative_phase_exact(source, ring)
    shifted = np.array([relative_phase_exact(source.with_pump_phase(source.pump_phase + d), EmissionAngles(x, y)) for d, x, y in zip(deltas, ring.theta_x, ring.theta_y)])
    if not np.allclose(shifted, base - deltas, rtol=0, atol=1e-9):
        failures.append("pump-phase linearity")

    # evenness in theta_y
    mirrored = EmissionAngles(ring.theta_x, -ring.theta_y)
    if not np.array_equal(relative_phase_quadratic(source, ring), relative_phase_quadratic(source, mirrored)):
        failures.append("q_y evenness")

    # LUT monotonicity
    for _ in range(50):
        knots = np.unique(rng.integers(1, 255, rng.integers(1, 8)))
        gray = np.concatenate([[0], knots, [255]])
        phase = np.cumsum(rng.uniform(0, 1, gray.size)) - 0.5
        if np.any(np.diff(calibrate_lut(np.column_stack([gray, phase]))) < 0):
            failures.append("LUT monotonicity")
            break

    # geometry round trip
    for long_axis in ("horizontal", "vertical"):
        s = SlmSpec(long_axis=long_axis)
        col, row = rng.integers(0, s.cols, 2000), rng.integers(0, s.rows, 2000)
        center = EmissionAngles(cone, 0.0)
        px = angle_to_pixel(s, pixel_to_angles(s, col, row, center), center)
        if not (np.array_equal(px.col, col) and np.array_equal(px.row, row)):
            failures.append(f"geometry round trip ({long_axis})")

    # unwrap continuity
    smap = relative_phase_map(locked, EmissionGrid.annulus(cone, math.radians(1.0), 128))
    v, m = smap.values, smap.grid.mask
    dx = np.abs(np.diff(v, axis=1))[m[:, 1:] & m[:, :-1]]
    dy = np.abs(np.diff(v, axis=0))[m[1:, :] & m[:-1, :]]
    if not (dx.max() < np.pi and dy.max() < np.pi):
        failures.append("unwrap continuity")

    # visibility scale invariance
    x = np.linspace(0, np.pi / 2, 40, endpoint=False)
    for _ in range(50):
        y = 1 + rng.uniform(0, 1) * np.cos(4 * x + rng.uniform(0, 2 * np.pi))
        k = 10 ** rng.uniform(-6, 6)
        if abs(visibility(Fringe(x, y)).visibility - visibility(Fringe(x, k * y)).visibility) > 1e-12:
            failures.append("visibility scale invariance")
            break

    checks = "sum rule, pump-phase linearity, q_y evenness, LUT monotonicity, geometry round trip, unwrap continuity, visibility scale invariance"
    report(9, "invariant suite", not failures, f"failed: {', '.join(failures)}" if failures else f"all hold ({checks})")
