"""Command-line reproduction of the cone, maps, scans, SLM pattern and visibility.

Exit status: 0 success, 2 configuration or file error, 3 physics-domain error
(no cone, out-of-range wavelength, evanescent mode), 4 coverage error, 5
internal contract violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .biphoton import EmissionGrid, lock_pump_phase, relative_phase_exact, relative_phase_map, time_delay_map
from .coincidence import Projector, profile_fwhm, radial_scan
from .config import DEFAULT_CONFIG_NAME, SCHEMA, ExperimentConfig, load_config
from .crystal import index_e_perp, index_extraordinary_principal, index_ordinary, walkoff_perp
from .errors import CalibrationError, ConfigError, ContractError, CoverageError, DomainError
from .fileio import save_map_csv, save_map_raster, write_lut, write_pgm, write_png, write_residual_csv, write_scan_csv
from .phasematching import EmissionAngles, degenerate_cone_angle
from .slm import (
    angle_to_pixel,
    compensation_pattern,
    panel_coverage,
    panel_grid,
    predicted_visibility_after,
    uncompensated_visibility,
    wrap_phase,
)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_COVERAGE, EXIT_CONTRACT = 0, 2, 3, 4, 5

PROJECTORS = {name: getattr(Projector, name) for name in ("HH", "VV", "HV", "VH", "PP", "PM")}


def _out(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _locked_source(cfg: ExperimentConfig):
    src = cfg.source()
    cone = degenerate_cone_angle(src.crystal_H, src.pump_wavelength)
    if cfg.pump_phase == "lock":
        src = lock_pump_phase(src, EmissionAngles(cone, 0.0))
    return src, cone


# --------------------------------------------------------------------------
# commands


def cmd_cone(cfg: ExperimentConfig) -> dict:
    src = cfg.source()
    cone = degenerate_cone_angle(src.crystal_H, src.pump_wavelength)
    deg_wl = 2 * src.pump_wavelength
    table = []
    for label, wl in (("pump", src.pump_wavelength), ("degenerate", deg_wl)):
        table.append(
            {
                "wave": label,
                "wavelength_um": wl,
                "n_o": float(index_ordinary(src.material, wl)),
                "n_e": float(index_extraordinary_principal(src.material, wl)),
                "n_e_perp": float(index_e_perp(src.crystal_H, wl)),
                "walkoff_deg": float(np.degrees(walkoff_perp(src.crystal_H, wl))),
            }
        )
    report = {
        "cut_angle_deg": cfg.cut_angle_deg,
        "pump_wavelength_um": src.pump_wavelength,
        "cone_angle_deg": float(np.degrees(cone)),
        "degenerate_wavelength_um": deg_wl,
        "indices": table,
    }
    print(f"cone half-opening angle: {report['cone_angle_deg']:.4f} deg")
    print(f"degenerate wavelength:   {deg_wl * 1e3:.1f} nm")
    print(f"{'wave':<11}{'lambda_um':>10}{'n_o':>10}{'n_e':>10}{'n_e_perp':>10}{'rho_deg':>9}")
    for row in table:
        print(
            f"{row['wave']:<11}{row['wavelength_um']:>10.4f}{row['n_o']:>10.5f}{row['n_e']:>10.5f}"
            f"{row['n_e_perp']:>10.5f}{row['walkoff_deg']:>9.4f}"
        )
    _write_json(_out(cfg) / "cone.json", report)
    return report


def cmd_maps(cfg: ExperimentConfig) -> dict:
    src, cone = _locked_source(cfg)
    grid = EmissionGrid.annulus(cone, np.radians(cfg.annulus_half_width_deg), cfg.grid_points)
    exact = relative_phase_map(src, grid, "exact")
    quad = relative_phase_map(src, grid, "quadratic")
    delay = time_delay_map(src, grid)
    out = _out(cfg)
    for name, smap in (("phase_exact", exact), ("phase_quadratic", quad), ("time_delay", delay)):
        save_map_csv(out / f"{name}.csv", smap)
        save_map_raster(out / f"{name}.smap", smap)
    diff = exact - quad
    d = delay.masked_values
    report = {
        "cone_angle_deg": float(np.degrees(cone)),
        "pump_phase_rad": src.pump_phase,
        "quadratic_max_abs_deviation_rad": float(np.abs(diff.masked_values).max()),
        "delay_mean_fs": float(d.mean() * 1e15),
        "delay_min_fs": float(d.min() * 1e15),
        "delay_max_fs": float(d.max() * 1e15),
        "dropped_samples": exact.dropped,
    }
    print(f"map grid: {cfg.grid_points}x{cfg.grid_points}, annulus {np.degrees(cone):.3f} +- {cfg.annulus_half_width_deg:g} deg")
    print(f"relative phase range (exact): {exact.masked_values.min():.4f} .. {exact.masked_values.max():.4f} rad")
    print(f"max |exact - quadratic|: {report['quadratic_max_abs_deviation_rad']:.3e} rad")
    print(f"time delay: mean {report['delay_mean_fs']:.2f} fs, range {report['delay_min_fs']:.2f} .. {report['delay_max_fs']:.2f} fs")
    _write_json(out / "maps.json", report)
    return report


def cmd_scan(cfg: ExperimentConfig, projectors=("PP", "HH")) -> dict:
    src, cone = _locked_source(cfg)
    pos = cfg.positions("scan_positions_deg")
    dense_deg = np.degrees(cone) + np.linspace(-1.5, 1.5, 121)
    dense = EmissionAngles(np.radians(dense_deg), np.zeros_like(dense_deg))
    iris = dict(iris_diameter=cfg.iris_diameter_m, distance=cfg.iris_distance_m, order=cfg.iris_order)
    points, profiles, summary = {}, {}, {}
    for name in projectors:
        proj = PROJECTORS[name]
        points[name] = radial_scan(src, proj, pos, **iris)
        profiles[name] = radial_scan(src, proj, dense, **iris)
        try:
            summary[f"fwhm_deg_{name}"] = float(profile_fwhm(dense_deg, profiles[name]))
        except ValueError:
            summary[f"fwhm_deg_{name}"] = float("nan")
        summary[f"peak_deg_{name}"] = float(dense_deg[np.argmax(profiles[name])])
    out = _out(cfg)
    write_scan_csv(out / "scan.csv", pos.theta_x, points, summary)
    write_scan_csv(out / "scan_profile.csv", dense.theta_x, profiles, summary)
    print(f"{'theta_x_deg':>12}" + "".join(f"{n:>10}" for n in projectors))
    for i, t in enumerate(np.degrees(pos.theta_x)):
        print(f"{t:>12.3f}" + "".join(f"{points[n][i]:>10.4f}" for n in projectors))
    for name in projectors:
        print(f"{name}: FWHM {summary[f'fwhm_deg_{name}']:.3f} deg, peak at {summary[f'peak_deg_{name}']:.3f} deg")
    _write_json(out / "scan.json", summary)
    return summary


def _pattern(cfg: ExperimentConfig):
    src, cone = _locked_source(cfg)
    slm = cfg.slm()
    center = EmissionAngles(cone, 0.0)
    grid = panel_grid(slm, center, np.radians(cfg.pattern_spacing_deg))
    # only the annulus around the cone is treated as illuminated
    grid = grid.with_mask(np.abs(grid.polar_angle() - cone) <= np.radians(cfg.annulus_half_width_deg))
    phase_map = relative_phase_map(src, grid, cfg.pattern_model)
    return src, cone, slm, center, phase_map, compensation_pattern(phase_map, slm, center)


def cmd_pattern(cfg: ExperimentConfig) -> dict:
    src, cone, slm, center, phase_map, pattern = _pattern(cfg)
    out = _out(cfg)
    write_pgm(out / "pattern.pgm", pattern.pixels, maxval=slm.levels - 1)
    if cfg.write_png:
        if slm.bit_depth != 8:
            raise ConfigError("PNG export supports 8-bit patterns only")
        write_png(out / "pattern.png", pattern.pixels)
    write_residual_csv(out / "residual.csv", pattern, stride=cfg.residual_stride)
    write_lut(out / "lut.txt", slm.gray_to_phase, comment="gray level to phase retardance used for the pattern")
    cov = panel_coverage(slm, cone, center)
    stats = pattern.residual_stats
    summary = {
        "cone_angle_deg": float(np.degrees(cone)),
        "panel_center_deg": [float(np.degrees(cone)), 0.0],
        "sector_deg": cov["sector_deg"],
        "cone_fraction": cov["fraction"],
        "arc_on_panel_deg": cov["arc_sector_deg"],
        "covered_pixels": int(stats["pixels"]),
        "residual_max_rad": float(stats["max"]),
        "residual_rms_rad": float(stats["rms"]),
        "quantization_bound_rad": float(np.pi / (slm.levels - 1)),
    }
    print(f"pattern {slm.cols}x{slm.rows}, {summary['covered_pixels']} covered pixels")
    print(f"azimuthal sector {summary['sector_deg']:.2f} deg, cone fraction {summary['cone_fraction']:.3f}")
    print(f"residual max {summary['residual_max_rad']:.4e} rad (bound {summary['quantization_bound_rad']:.4e}), rms {summary['residual_rms_rad']:.4e}")
    _write_json(out / "coverage.json", summary)
    return summary


def cmd_visibility(cfg: ExperimentConfig) -> dict:
    src, cone, slm, center, phase_map, pattern = _pattern(cfg)
    pos = cfg.positions()
    iris = dict(iris=cfg.iris_diameter_m, distance=cfg.iris_distance_m, order=cfg.iris_order)
    before = uncompensated_visibility(phase_map, pos, **iris)
    after = predicted_visibility_after(phase_map, pattern, pos, **iris)
    phase_before = relative_phase_exact(src, pos)
    px = angle_to_pixel(slm, pos, center)
    phase_after = wrap_phase(phase_before + slm.gray_to_phase[pattern.pixels[px.row, px.col]])
    rows = []
    print(f"{'theta_x_deg':>12}{'V_before':>10}{'V_after':>10}{'phase_before':>14}{'phase_after':>13}")
    for i, t in enumerate(cfg.visibility_positions_deg):
        rows.append(
            {
                "theta_x_deg": t,
                "visibility_before": float(before[i]),
                "visibility_after": float(after[i]),
                "phase_before_rad": float(phase_before[i]),
                "phase_after_rad": float(phase_after[i]),
            }
        )
        print(f"{t:>12.3f}{before[i]:>10.4f}{after[i]:>10.4f}{phase_before[i]:>14.4f}{phase_after[i]:>13.4f}")
    out = _out(cfg)
    _write_json(out / "visibility.json", {"positions": rows, "pump_phase_rad": src.pump_phase})
    return {"positions": rows}


# --------------------------------------------------------------------------
# argument handling


def _parse_set(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"YAML config file (default ./{DEFAULT_CONFIG_NAME} if present)")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--pump", dest="pump_wavelength_um", type=float, help="pump wavelength, um")
    common.add_argument("--cut", dest="cut_angle_deg", type=float, help="crystal cut angle, deg")
    common.add_argument("--length", dest="crystal_length_m", type=float, help="crystal length, m")
    common.add_argument("--filter-fwhm", dest="filter_fwhm_um", type=float, help="filter FWHM, um")
    common.add_argument("--grid", dest="grid_points", type=int, help="map samples per axis")
    common.add_argument("--pump-phase", dest="pump_phase", help="'lock' or radians")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key (repeatable)")

    parser = argparse.ArgumentParser(
        prog="spdc-slm",
        description="Two-crystal SPDC source maps and SLM compensation.",
        epilog="Config keys: " + ", ".join(f"{k} ({v[1]})" for k, v in SCHEMA.items()),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cone", parents=[common], help="phase-matched cone angle and index table")
    sub.add_parser("maps", parents=[common], help="relative-phase and time-delay maps")
    scan = sub.add_parser("scan", parents=[common], help="radial coincidence scans behind the iris")
    scan.add_argument("--projector", nargs="+", choices=sorted(PROJECTORS), default=["PP", "HH"])
    pattern = sub.add_parser("pattern", parents=[common], help="SLM compensation pattern and residual")
    pattern.add_argument("--png", dest="write_png", action="store_const", const=True, help="also write pattern.png")
    sub.add_parser("visibility", parents=[common], help="visibility before and after compensation")
    return parser


def config_from_args(args) -> ExperimentConfig:
    overrides = _parse_set(args.set)
    for key in ("output_dir", "pump_wavelength_um", "cut_angle_deg", "crystal_length_m", "filter_fwhm_um", "grid_points", "pump_phase", "write_png"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "cone":
            cmd_cone(cfg)
        elif args.command == "maps":
            cmd_maps(cfg)
        elif args.command == "scan":
            cmd_scan(cfg, tuple(args.projector))
        elif args.command == "pattern":
            cmd_pattern(cfg)
        else:
            cmd_visibility(cfg)
    except (ConfigError, CalibrationError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CoverageError as exc:
        print(f"coverage error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ContractError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
