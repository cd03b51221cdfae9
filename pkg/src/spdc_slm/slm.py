"""Spatial-light-modulator compensation of the relative-phase map.

Geometry: the panel sits in the transverse plane at ``distance`` from the
crystals.  A direction (theta_x, theta_y) meets the plane at
``X = distance * tan(theta_x - center_x)``, ``Y = distance * tan(theta_y - center_y)``
relative to the panel centre.  With ``long_axis="horizontal"`` columns run
along +X and rows along -Y (row 0 at the top); with ``long_axis="vertical"``
the panel is turned by 90 deg so columns run along +Y and rows along +X.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .biphoton import EmissionGrid, ScalarMap
from .coincidence import DEFAULT_IRIS_ORDER, iris_footprint
from .errors import CalibrationError, ConfigError, CoverageError
from .phasematching import EmissionAngles

__all__ = [
    "PixelIndex",
    "SlmPattern",
    "SlmSpec",
    "angle_to_pixel",
    "calibrate_lut",
    "compensation_pattern",
    "linear_lut",
    "panel_coverage",
    "panel_grid",
    "pixel_to_angles",
    "predicted_visibility_after",
    "quantize_phase",
    "recompute_residual",
    "uncompensated_visibility",
    "wrap_phase",
]

TWO_PI = 2 * np.pi


def linear_lut(bit_depth=8, max_phase=TWO_PI):
    levels = 2**bit_depth
    return max_phase * np.arange(levels) / (levels - 1)


@dataclass(frozen=True)
class SlmSpec:
    width: float = 15.36e-3
    height: float = 8.64e-3
    cols: int = 1920
    rows: int = 1080
    bit_depth: int = 8
    distance: float = 0.244
    gray_to_phase: np.ndarray = field(default=None, repr=False)
    loss_factor: float = 0.4
    long_axis: str = "vertical"

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0 and self.distance > 0):
            raise ConfigError("panel size and distance must be positive")
        if self.cols < 1 or self.rows < 1 or not 1 <= self.bit_depth <= 16:
            raise ConfigError("invalid panel resolution or bit depth")
        if not 0 <= self.loss_factor <= 1:
            raise ConfigError("loss_factor must lie in [0, 1]")
        if self.long_axis not in ("horizontal", "vertical"):
            raise ConfigError(f"long_axis must be 'horizontal' or 'vertical', not {self.long_axis!r}")
        lut = linear_lut(self.bit_depth) if self.gray_to_phase is None else np.asarray(self.gray_to_phase, float)
        if lut.shape != (2**self.bit_depth,):
            raise ConfigError(f"gray_to_phase needs {2**self.bit_depth} entries, got {lut.shape}")
        if lut[0] != 0.0 or np.any(np.diff(lut) < 0) or lut[-1] > TWO_PI * 1.05:
            raise ConfigError("gray_to_phase must start at 0, be nondecreasing and stay below 1.05 * 2pi")
        lut = lut.copy()
        lut.flags.writeable = False
        object.__setattr__(self, "gray_to_phase", lut)

    @property
    def levels(self) -> int:
        return 2**self.bit_depth

    @property
    def pitch(self):
        """(pitch along columns, pitch along rows) in metres."""
        return self.width / self.cols, self.height / self.rows


class PixelIndex(NamedTuple):
    col: np.ndarray
    row: np.ndarray
    inside: np.ndarray


def _plane_to_panel(slm: SlmSpec, x, y):
    if slm.long_axis == "horizontal":
        return x, y
    return y, -x


def _panel_to_plane(slm: SlmSpec, u, v):
    if slm.long_axis == "horizontal":
        return u, v
    return -v, u


def angle_to_pixel(slm: SlmSpec, angles: EmissionAngles, panel_center: EmissionAngles) -> PixelIndex:
    """Nearest pixel hit by each direction; ``inside`` is False off the panel."""
    x = slm.distance * np.tan(np.asarray(angles.theta_x, float) - panel_center.theta_x)
    y = slm.distance * np.tan(np.asarray(angles.theta_y, float) - panel_center.theta_y)
    u, v = _plane_to_panel(slm, x, y)
    pu, pv = slm.pitch
    col = np.floor(u / pu + slm.cols / 2).astype(np.int64)
    row = np.floor(slm.rows / 2 - v / pv).astype(np.int64)
    inside = (col >= 0) & (col < slm.cols) & (row >= 0) & (row < slm.rows)
    return PixelIndex(np.where(inside, col, -1), np.where(inside, row, -1), inside)


def pixel_to_angles(slm: SlmSpec, col, row, panel_center: EmissionAngles) -> EmissionAngles:
    """Direction through the centre of pixel (col, row)."""
    pu, pv = slm.pitch
    u = (np.asarray(col, float) + 0.5 - slm.cols / 2) * pu
    v = (slm.rows / 2 - np.asarray(row, float) - 0.5) * pv
    x, y = _panel_to_plane(slm, u, v)
    return EmissionAngles(
        panel_center.theta_x + np.arctan(x / slm.distance),
        panel_center.theta_y + np.arctan(y / slm.distance),
    )


def wrap_phase(phase):
    """Wrap into (-pi, pi]."""
    phase = np.asarray(phase, dtype=float)
    return phase - TWO_PI * np.ceil((phase - np.pi) / TWO_PI)


def quantize_phase(target, lut):
    """Gray level whose phase is cyclically nearest to ``target``.

    Ties go to the lower gray level.
    """
    lut = np.asarray(lut, dtype=float)
    target = np.mod(np.asarray(target, dtype=float), TWO_PI)
    last = lut.size - 1
    hi = np.minimum(np.searchsorted(lut, target, side="left"), last)
    below = np.maximum(hi - 1, 0)
    below = np.searchsorted(lut, lut[below], side="left")
    cands = np.stack([np.zeros_like(hi), below, hi, np.full_like(hi, last)])
    dist = np.abs(wrap_phase(target[None] - lut[cands]))
    pick = np.argmin(dist, axis=0)
    return np.take_along_axis(cands, pick[None], axis=0)[0]


def calibrate_lut(measured, bit_depth=8):
    """Piecewise-linear gray-to-phase table through measured (gray, phase) points.

    Levels outside the measured span are clamped to the end phases, and
    phases are referenced to gray 0.
    """
    pts = np.asarray(measured, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise CalibrationError("need at least two (gray, phase) points")
    gray, phase = pts[:, 0], pts[:, 1]
    if np.any(np.diff(gray) <= 0):
        raise CalibrationError("gray levels must be strictly increasing (no duplicates)")
    if np.any(np.diff(phase) < 0):
        raise CalibrationError("measured phase is not monotone in gray level; apply a gamma correction first")
    if gray[0] < 0 or gray[-1] > 2**bit_depth - 1 or np.any(gray != np.round(gray)):
        raise CalibrationError(f"gray levels must be integers in [0, {2**bit_depth - 1}]")
    lut = np.interp(np.arange(2**bit_depth), gray, phase)
    return lut - lut[0]


# --------------------------------------------------------------------------
# pattern generation


class _MapSampler:
    """Cubic-spline view of a ScalarMap plus nearest-sample mask lookup."""

    def __init__(self, phase_map: ScalarMap):
        g = phase_map.grid
        if g.theta_x_axis.size < 4 or g.theta_y_axis.size < 4:
            raise ConfigError("phase map needs at least 4 samples per axis")
        if not np.all(np.isfinite(phase_map.values)):
            raise ConfigError("phase map must be finite on every sample to be interpolated")
        self.tx = g.theta_x_axis
        self.ty = g.theta_y_axis
        self.mask = g.mask
        self.spline = RectBivariateSpline(self.ty, self.tx, phase_map.values, kx=3, ky=3)

    def covered(self, angles: EmissionAngles):
        tx = np.asarray(angles.theta_x, float)
        ty = np.asarray(angles.theta_y, float)
        within = (tx >= self.tx[0]) & (tx <= self.tx[-1]) & (ty >= self.ty[0]) & (ty <= self.ty[-1])
        ix = _nearest(self.tx, tx)
        iy = _nearest(self.ty, ty)
        return within & self.mask[iy, ix]

    def __call__(self, angles: EmissionAngles):
        tx = np.asarray(angles.theta_x, float)
        ty = np.asarray(angles.theta_y, float)
        return self.spline.ev(ty, tx)


def _nearest(axis, x):
    i = np.clip(np.searchsorted(axis, x), 1, axis.size - 1)
    return np.where(np.abs(x - axis[i - 1]) <= np.abs(axis[i] - x), i - 1, i)


@dataclass(frozen=True)
class SlmPattern:
    pixels: np.ndarray
    phase_equivalent: np.ndarray
    coverage_mask: np.ndarray
    residual: np.ndarray
    residual_stats: dict
    slm: SlmSpec
    panel_center: EmissionAngles


def _residual_stats(residual, mask):
    r = np.abs(residual[mask])
    return {"max": float(r.max()), "mean": float(r.mean()), "rms": float(np.sqrt(np.mean(r**2))), "pixels": int(r.size)}


def _pixel_grid(slm: SlmSpec, panel_center):
    rows, cols = np.meshgrid(np.arange(slm.rows), np.arange(slm.cols), indexing="ij")
    return pixel_to_angles(slm, cols, rows, panel_center)


def compensation_pattern(phase_map: ScalarMap, slm: SlmSpec, panel_center: EmissionAngles) -> SlmPattern:
    """Inverted, wrapped and quantized relative-phase map for the panel.

    Pixels that see no masked-in part of the map are written as gray 0 and left
    out of the residual statistics.
    """
    sampler = _MapSampler(phase_map)
    angles = _pixel_grid(slm, panel_center)
    covered = sampler.covered(angles)
    if not covered.any():
        raise CoverageError("the phase map does not reach any pixel of the panel")
    theta = sampler(angles)
    gray = np.zeros(covered.shape, dtype=np.uint16 if slm.bit_depth > 8 else np.uint8)
    gray[covered] = quantize_phase(-theta[covered], slm.gray_to_phase)
    phase_eq = slm.gray_to_phase[gray]
    residual = np.full(covered.shape, np.nan)
    residual[covered] = wrap_phase(theta[covered] + phase_eq[covered])
    return SlmPattern(gray, phase_eq, covered, residual, _residual_stats(residual, covered), slm, panel_center)


def recompute_residual(pattern: SlmPattern, phase_map: ScalarMap):
    """Residual rebuilt from the stored pixels, the LUT and the input map."""
    sampler = _MapSampler(phase_map)
    angles = _pixel_grid(pattern.slm, pattern.panel_center)
    covered = sampler.covered(angles)
    theta = sampler(angles)
    phase = pattern.slm.gray_to_phase[pattern.pixels]
    residual = np.full(covered.shape, np.nan)
    residual[covered] = wrap_phase(theta[covered] + phase[covered])
    return residual


def panel_grid(slm: SlmSpec, panel_center: EmissionAngles, spacing=np.radians(0.01), margin=3) -> EmissionGrid:
    """Square-spaced angular grid covering every pixel direction of the panel."""
    if not spacing > 0:
        raise ConfigError("grid spacing must be positive")
    corners = pixel_to_angles(slm, np.array([0, slm.cols - 1, 0, slm.cols - 1]), np.array([0, 0, slm.rows - 1, slm.rows - 1]), panel_center)
    axes = []
    for c in (corners.theta_x, corners.theta_y):
        lo, hi = c.min() - margin * spacing, c.max() + margin * spacing
        n = int(np.ceil((hi - lo) / spacing)) + 1
        axes.append(lo + spacing * np.arange(n))
    return EmissionGrid(*axes)


# --------------------------------------------------------------------------
# coverage and visibility


def panel_coverage(slm: SlmSpec, cone_angle, panel_center: EmissionAngles, samples=720_001):
    """Azimuthal coverage of the emission cone by the panel.

    ``sector_deg`` is the azimuth range subtended, from the pump axis, by the
    panel's tangential extent at the cone radius; ``fraction`` relates it to
    the 180 deg of half-cone whose partners the other arm receives.
    ``arc_sector_deg`` is the length of the cone circle lying on the panel,
    expressed as an angle.
    """
    xc = slm.distance * np.tan(panel_center.theta_x)
    yc = slm.distance * np.tan(panel_center.theta_y)
    radius = np.hypot(xc, yc)
    if radius == 0:
        raise CoverageError("panel centred on the pump axis: sector undefined")
    tangent = np.array([-yc, xc]) / radius
    u_dir = np.array([1.0, 0.0]) if slm.long_axis == "horizontal" else np.array([0.0, 1.0])
    v_dir = np.array([0.0, 1.0]) if slm.long_axis == "horizontal" else np.array([-1.0, 0.0])
    half_t = 0.5 * (abs(tangent @ u_dir) * slm.width + abs(tangent @ v_dir) * slm.height)
    sector = 2 * np.degrees(np.arctan(half_t / radius))

    cone_r = slm.distance * np.tan(cone_angle)
    phi = np.linspace(-np.pi, np.pi, samples, endpoint=False)
    circle = EmissionAngles(np.arctan(cone_r * np.cos(phi) / slm.distance), np.arctan(cone_r * np.sin(phi) / slm.distance))
    on_panel = angle_to_pixel(slm, circle, panel_center).inside
    return {
        "sector_deg": float(sector),
        "fraction": float(sector / 180.0),
        "arc_sector_deg": float(360.0 * on_panel.mean()),
        "cone_radius_m": float(cone_r),
    }


def _position_label(positions: EmissionAngles, ok):
    """First position whose footprint row in ``ok`` has an uncovered node."""
    bad = int(np.nonzero(~ok.all(axis=1))[0][0])
    txs, tys = np.broadcast_arrays(np.atleast_1d(positions.theta_x), np.atleast_1d(positions.theta_y))
    return f"({np.degrees(txs[bad]):.3f} deg, {np.degrees(tys[bad]):.3f} deg)"


def predicted_visibility_after(
    phase_map: ScalarMap,
    pattern: SlmPattern,
    positions: EmissionAngles,
    iris=2e-3,
    distance=0.5,
    order=DEFAULT_IRIS_ORDER,
):
    """Fringe visibility |<cos residual>| over each iris footprint with the pattern loaded."""
    sampler = _MapSampler(phase_map)
    angles, w = iris_footprint(positions, iris, distance, order)
    px = angle_to_pixel(pattern.slm, angles, pattern.panel_center)
    ok = px.inside.copy()
    ok[ok] = pattern.coverage_mask[px.row[ok], px.col[ok]]
    ok &= sampler.covered(angles)
    if not ok.all():
        raise CoverageError(f"iris footprint at {_position_label(positions, ok)} is not fully covered by the pattern")
    residual = wrap_phase(sampler(angles) + pattern.slm.gray_to_phase[pattern.pixels[px.row, px.col]])
    return np.abs(np.cos(residual) @ w)


def uncompensated_visibility(
    phase_map: ScalarMap,
    positions: EmissionAngles,
    iris=2e-3,
    distance=0.5,
    order=DEFAULT_IRIS_ORDER,
    reoptimize_pump_phase=True,
):
    """Visibility without the SLM.

    By default the pump phase is re-tuned at each position, giving
    ``|<exp(i theta)>|``; otherwise ``|<cos theta>|`` at the map's pump phase.
    """
    sampler = _MapSampler(phase_map)
    angles, w = iris_footprint(positions, iris, distance, order)
    ok = sampler.covered(angles)
    if not ok.all():
        raise CoverageError(f"iris footprint at {_position_label(positions, ok)} leaves the masked phase map")
    theta = sampler(angles)
    if reoptimize_pump_phase:
        return np.abs(np.exp(1j * theta) @ w)
    return np.abs(np.cos(theta) @ w)
