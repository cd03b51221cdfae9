"""Relative phase, time delay and pair amplitudes of the crossed-crystal source.

HH pairs are born as ordinary photons in the vertical_yz crystal and then
cross the horizontal_xz crystal as extraordinary waves; VV pairs are born in
the horizontal_xz crystal.  The pump is a plane wave (q_p = 0), so the idler
always leaves along q_2 = -q_1 and every map is a function of the signal
direction alone.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C

from .crystal import AxisPlane, CrystalSpec, Material, _e_perp, _walkoff, bbo
from .errors import ConfigError, DomainError
from .phasematching import (
    EmissionAngles,
    _kappa_e,
    _kappa_o,
    angles_to_q,
    degenerate_cone_angle,
    omega_to_wavelength,
    wavelength_to_omega,
)

log = logging.getLogger(__name__)

__all__ = [
    "EmissionGrid",
    "MapUnit",
    "QuadraticPhase",
    "ScalarMap",
    "SourceConfig",
    "amplitude_magnitudes",
    "biphoton_amplitudes",
    "lock_pump_phase",
    "default_source",
    "pump_phase_from_power",
    "relative_phase_exact",
    "relative_phase_map",
    "relative_phase_quadratic",
    "time_delay_map",
]


@dataclass(frozen=True)
class SourceConfig:
    crystal_H: CrystalSpec
    crystal_V: CrystalSpec
    pump_wavelength: float = 0.405
    pump_coherence_time: float = 300e-15
    pump_phase: float = 0.0
    filter_center: float = 0.810
    filter_fwhm: float = 0.010
    filter_shape: str = "gaussian"

    def __post_init__(self):
        h, v = self.crystal_H, self.crystal_V
        if h.axis_plane is not AxisPlane.HORIZONTAL_XZ or v.axis_plane is not AxisPlane.VERTICAL_YZ:
            raise ConfigError("crystal_H must be horizontal_xz and crystal_V vertical_yz")
        if h.material != v.material or h.cut_angle != v.cut_angle or h.length != v.length:
            raise ConfigError("the two crystals must be identically cut (material, cut angle, length)")
        if not self.pump_coherence_time > 0:
            raise ConfigError("pump coherence time must be positive")
        if not self.filter_fwhm > 0:
            raise ConfigError("filter FWHM must be positive")
        if self.filter_shape not in ("gaussian", "rect"):
            raise ConfigError(f"unknown filter shape {self.filter_shape!r}")
        self.material.check_wavelength(self.pump_wavelength)
        lo, hi = self.band_limits
        # the partner photon of the band edge must also be inside the dispersion data
        idler_hi = 1.0 / (1.0 / self.pump_wavelength - 1.0 / hi)
        idler_lo = 1.0 / (1.0 / self.pump_wavelength - 1.0 / lo) if lo > self.pump_wavelength else np.inf
        try:
            self.material.check_wavelength([lo, hi, idler_lo, idler_hi])
        except DomainError as exc:
            raise ConfigError(f"filter passband not covered by dispersion data: {exc}") from None

    @property
    def material(self) -> Material:
        return self.crystal_H.material

    @property
    def length(self) -> float:
        return self.crystal_H.length

    @property
    def pump_omega(self) -> float:
        return float(wavelength_to_omega(self.pump_wavelength))

    @property
    def degenerate_omega(self) -> float:
        """Signal frequency at the filter centre."""
        return float(wavelength_to_omega(self.filter_center))

    @property
    def band_limits(self) -> tuple[float, float]:
        """Wavelength interval (um) over which the filter is integrated."""
        half = 0.5 * self.filter_fwhm if self.filter_shape == "rect" else 3.0 * self.filter_fwhm
        return self.filter_center - half, self.filter_center + half

    def with_pump_phase(self, phase: float) -> "SourceConfig":
        return replace(self, pump_phase=float(phase))


def default_source(
    cut_angle_deg: float = 29.3,
    length: float = 0.5e-3,
    pump_wavelength: float = 0.405,
    material: Material | None = None,
    **kwargs,
) -> SourceConfig:
    """Two abutted 0.5 mm type-I BBO crystals cut at 29.3 deg, 405 nm pump."""
    material = material or bbo()
    cut = np.radians(cut_angle_deg)
    h = CrystalSpec(material, cut, length, AxisPlane.HORIZONTAL_XZ)
    return SourceConfig(h, h.rotated(), pump_wavelength=pump_wavelength, **kwargs)


# --------------------------------------------------------------------------
# grids and sampled maps


class MapUnit(str, enum.Enum):
    RADIANS = "radians"
    SECONDS = "seconds"
    ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class EmissionGrid:
    """Rectangular (theta_x, theta_y) sampling; arrays are indexed [iy, ix]."""

    theta_x_axis: np.ndarray
    theta_y_axis: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        tx = np.asarray(self.theta_x_axis, dtype=float)
        ty = np.asarray(self.theta_y_axis, dtype=float)
        for name, ax in (("theta_x", tx), ("theta_y", ty)):
            if ax.ndim != 1 or ax.size < 1:
                raise ConfigError(f"{name} axis must be a non-empty 1-D array")
            if np.any(np.diff(ax) <= 0):
                raise ConfigError(f"{name} axis must be strictly increasing")
        mask = np.ones((ty.size, tx.size), bool) if self.mask is None else np.asarray(self.mask, bool)
        if mask.shape != (ty.size, tx.size):
            raise ConfigError(f"mask shape {mask.shape} does not match axes {(ty.size, tx.size)}")
        object.__setattr__(self, "theta_x_axis", tx)
        object.__setattr__(self, "theta_y_axis", ty)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self):
        return self.mask.shape

    def mesh(self):
        return np.meshgrid(self.theta_x_axis, self.theta_y_axis)

    def angles(self) -> EmissionAngles:
        tx, ty = self.mesh()
        return EmissionAngles(tx, ty)

    def polar_angle(self):
        """Angle from the pump axis of each sample direction."""
        tx, ty = self.mesh()
        return np.arctan(np.hypot(np.tan(tx), np.tan(ty)))

    def with_mask(self, mask) -> "EmissionGrid":
        return EmissionGrid(self.theta_x_axis, self.theta_y_axis, mask)

    @classmethod
    def square(cls, half_extent, n, center=(0.0, 0.0)):
        tx = center[0] + np.linspace(-half_extent, half_extent, n)
        ty = center[1] + np.linspace(-half_extent, half_extent, n)
        return cls(tx, ty)

    @classmethod
    def annulus(cls, cone_angle, half_width, n):
        """Square grid over the whole cone, masked to ``cone_angle +- half_width``."""
        grid = cls.square(cone_angle + half_width, n)
        polar = grid.polar_angle()
        return grid.with_mask(np.abs(polar - cone_angle) <= half_width)


@dataclass(frozen=True)
class ScalarMap:
    grid: EmissionGrid
    values: np.ndarray
    unit: MapUnit = MapUnit.RADIANS
    dropped: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ConfigError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "unit", MapUnit(self.unit))
        if not np.all(np.isfinite(values[self.grid.mask])):
            raise DomainError("non-finite map values on masked-in samples")

    @property
    def masked_values(self):
        return self.values[self.grid.mask]

    def __sub__(self, other: "ScalarMap") -> "ScalarMap":
        return ScalarMap(self.grid.with_mask(self.grid.mask & other.grid.mask), self.values - other.values, self.unit)


# --------------------------------------------------------------------------
# phase-matching terms


def _mismatches(cfg: SourceConfig, omega1, omega2, qx, qy):
    """(dk_ooe_V, dk_ooe_H, dk_eeo_H) for q_2 = -q_1 and a plane-wave pump.

    Evanescent samples come back as NaN.
    """
    m = cfg.material
    cut = cfg.crystal_H.cut_angle
    omega1 = np.asarray(omega1, dtype=float)
    omega2 = np.asarray(omega2, dtype=float)
    omega_p = omega1 + omega2
    wl1 = m.check_wavelength(omega_to_wavelength(omega1))
    wl2 = m.check_wavelength(omega_to_wavelength(omega2))
    wlp = m.check_wavelength(omega_to_wavelength(omega_p))
    no1, ne1 = m.sellmeier_o.index(wl1), m.sellmeier_e.index(wl1)
    no2, ne2 = m.sellmeier_o.index(wl2), m.sellmeier_e.index(wl2)
    nop, nep = m.sellmeier_o.index(wlp), m.sellmeier_e.index(wlp)
    q2 = qx * qx + qy * qy
    zero = np.zeros_like(q2)
    with np.errstate(invalid="ignore"):
        k1o = _kappa_o(no1, omega1, q2)
        k2o = _kappa_o(no2, omega2, q2)
        kpo = _kappa_o(nop, omega_p, zero)
        kp_eH = _kappa_e(no=nop, ne=nep, cut=cut, plane=AxisPlane.HORIZONTAL_XZ, omega=omega_p, qx=zero, qy=zero)
        kp_eV = _kappa_e(no=nop, ne=nep, cut=cut, plane=AxisPlane.VERTICAL_YZ, omega=omega_p, qx=zero, qy=zero)
        k1e = _kappa_e(no1, ne1, cut, AxisPlane.HORIZONTAL_XZ, omega1, qx, qy)
        k2e = _kappa_e(no2, ne2, cut, AxisPlane.HORIZONTAL_XZ, omega2, -qx, -qy)
    return kp_eV - k1o - k2o, kp_eH - k1o - k2o, kpo - k1e - k2e


def _signal_frequencies(cfg, omega_1, omega_2):
    omega_1 = cfg.degenerate_omega if omega_1 is None else omega_1
    omega_2 = cfg.pump_omega - np.asarray(omega_1, dtype=float) if omega_2 is None else omega_2
    return np.asarray(omega_1, dtype=float), np.asarray(omega_2, dtype=float)


def _raise_if_nan(*arrays):
    for a in arrays:
        if np.any(np.isnan(a)):
            raise DomainError("evanescent mode for the requested emission angle")


def _exact_phase(cfg, angles, omega_1, omega_2):
    qx, qy = angles_to_q(omega_1, angles)
    dv, dh, de = _mismatches(cfg, omega_1, omega_2, qx, qy)
    return (0.5 * (dv - dh) + de) * cfg.length - cfg.pump_phase


def relative_phase_exact(cfg: SourceConfig, angles: EmissionAngles, omega_1=None, omega_2=None):
    """Unwrapped relative phase arg(Phi_VV / Phi_HH) from the full wavevectors.

    ``omega_1`` defaults to the filter centre and ``omega_2`` to
    ``omega_p0 - omega_1``; pass ``omega_2`` explicitly to move off the
    central pump frequency.
    """
    omega_1, omega_2 = _signal_frequencies(cfg, omega_1, omega_2)
    value = _exact_phase(cfg, angles, omega_1, omega_2)
    _raise_if_nan(value)
    return value


@dataclass(frozen=True)
class QuadraticPhase:
    """``theta(q) = (offset + linear_x q_x + quad_x q_x^2 + quad_y q_y^2) L - phi_p``."""

    offset: object
    linear_x: object
    quad_x: object
    quad_y: object
    length: float
    pump_phase: float

    def __call__(self, qx, qy):
        inner = self.offset + self.linear_x * qx + self.quad_x * qx**2 + self.quad_y * qy**2
        return inner * self.length - self.pump_phase

    def gradient(self, qx, qy):
        """(d/dq_x, d/dq_y) in rad per rad/m."""
        return (
            (self.linear_x + 2 * self.quad_x * qx) * self.length,
            2 * self.quad_y * qy * self.length,
        )

    @classmethod
    def from_config(cls, cfg: SourceConfig, omega_1, omega_2) -> "QuadraticPhase":
        m = cfg.material
        cut = cfg.crystal_H.cut_angle
        w1 = np.asarray(omega_1, dtype=float)
        w2 = np.asarray(omega_2, dtype=float)
        wl1 = m.check_wavelength(omega_to_wavelength(w1))
        wl2 = m.check_wavelength(omega_to_wavelength(w2))
        wlp = m.check_wavelength(omega_to_wavelength(w1 + w2))
        n_po = m.sellmeier_o.index(wlp)
        n1o, n1e = m.sellmeier_o.index(wl1), m.sellmeier_e.index(wl1)
        n2o, n2e = m.sellmeier_o.index(wl2), m.sellmeier_e.index(wl2)
        n1p, n2p = _e_perp(n1o, n1e, cut), _e_perp(n2o, n2e, cut)
        tan_r1, tan_r2 = np.tan(_walkoff(n1o, n1e, cut)), np.tan(_walkoff(n2o, n2e, cut))
        return cls(
            offset=((n_po - n1p) * w1 + (n_po - n2p) * w2) / C,
            linear_x=-(tan_r1 - tan_r2),
            quad_x=0.5 * C * (n1p**3 / (w1 * n1e**2 * n1o**2) + n2p**3 / (w2 * n2e**2 * n2o**2)),
            quad_y=0.5 * C * (n1p / (w1 * n1e**2) + n2p / (w2 * n2e**2)),
            length=cfg.length,
            pump_phase=cfg.pump_phase,
        )


def relative_phase_quadratic(cfg: SourceConfig, angles: EmissionAngles, omega_1=None, omega_2=None):
    """Relative phase from the second-order expansion in q."""
    omega_1, omega_2 = _signal_frequencies(cfg, omega_1, omega_2)
    qx, qy = angles_to_q(omega_1, angles)
    return QuadraticPhase.from_config(cfg, omega_1, omega_2)(qx, qy)


class PhaseModel(str, enum.Enum):
    EXACT = "exact"
    QUADRATIC = "quadratic"


def _masked_map(grid: EmissionGrid, values, unit) -> ScalarMap:
    bad = ~np.isfinite(values) & grid.mask
    dropped = int(bad.sum())
    if dropped:
        log.warning("%d samples dropped from the map (evanescent or out of domain)", dropped)
    return ScalarMap(grid.with_mask(grid.mask & ~bad), values, unit, dropped)


def relative_phase_map(cfg: SourceConfig, grid: EmissionGrid, model="exact") -> ScalarMap:
    """Unwrapped relative phase at the degenerate frequency on every grid sample."""
    model = PhaseModel(model)
    w1, w2 = _signal_frequencies(cfg, None, None)
    angles = grid.angles()
    if model is PhaseModel.EXACT:
        values = _exact_phase(cfg, angles, w1, w2)
    else:
        qx, qy = angles_to_q(w1, angles)
        values = QuadraticPhase.from_config(cfg, w1, w2)(qx, qy)
    return _masked_map(grid, values, MapUnit.RADIANS)


def _delay(cfg, angles, w1, w2, step):
    hi = _exact_phase(cfg, angles, w1 + step, w2)
    lo = _exact_phase(cfg, angles, w1 - step, w2)
    return (hi - lo) / (2 * step)


def time_delay_map(cfg: SourceConfig, grid: EmissionGrid, rel_step=1e-4, tol=1e-16, max_halvings=8) -> ScalarMap:
    """HH/VV time delay, d(theta)/d(omega_1) at fixed omega_2, in seconds.

    Central differences on the exact phase; the step is halved until two
    successive estimates agree to ``tol`` seconds everywhere on the mask.
    """
    w1, w2 = _signal_frequencies(cfg, None, None)
    lo, hi = cfg.band_limits
    if not lo <= cfg.filter_center <= hi:
        raise DomainError("degenerate frequency outside the filter band")
    angles = grid.angles()
    step = rel_step * float(w1)
    coarse = _delay(cfg, angles, w1, w2, step)
    for _ in range(max_halvings):
        step /= 2
        fine = _delay(cfg, angles, w1, w2, step)
        diff = np.abs(fine - coarse)[grid.mask & np.isfinite(fine)]
        if diff.size == 0 or diff.max() < tol:
            return _masked_map(grid, fine, MapUnit.SECONDS)
        coarse = fine
    raise DomainError("time-delay finite difference did not converge")


# --------------------------------------------------------------------------
# amplitudes


def pump_spectrum(cfg: SourceConfig, omega_p):
    tau = cfg.pump_coherence_time
    return np.sqrt(tau) / np.pi**0.25 * np.exp(-0.5 * tau**2 * (np.asarray(omega_p) - cfg.pump_omega) ** 2)


def _sinc(x):
    return np.sinc(x / np.pi)


def _amplitudes_unchecked(cfg, omega_1, omega_2, qx, qy, phase_offset=0.0):
    dv, dh, de = _mismatches(cfg, omega_1, omega_2, qx, qy)
    L = cfg.length
    ap = pump_spectrum(cfg, omega_1 + omega_2) * L
    phi_hh = cfg.crystal_V.nonlinear_scale * ap * _sinc(0.5 * dv * L) * np.exp(-1j * L * (0.5 * dv + de))
    phi_vv = (
        cfg.crystal_H.nonlinear_scale
        * ap
        * _sinc(0.5 * dh * L)
        * np.exp(-1j * (cfg.pump_phase + 0.5 * dh * L - phase_offset))
    )
    return phi_hh, phi_vv


def biphoton_amplitudes(cfg: SourceConfig, angles: EmissionAngles, omega_1=None, omega_2=None):
    """Complex (Phi_HH, Phi_VV) up to a common constant factor."""
    omega_1, omega_2 = _signal_frequencies(cfg, omega_1, omega_2)
    qx, qy = angles_to_q(omega_1, angles)
    hh, vv = _amplitudes_unchecked(cfg, omega_1, omega_2, qx, qy)
    _raise_if_nan(hh, vv)
    return hh, vv


def amplitude_magnitudes(cfg: SourceConfig, angles: EmissionAngles, omega_1=None, omega_2=None):
    hh, vv = biphoton_amplitudes(cfg, angles, omega_1, omega_2)
    return np.abs(hh), np.abs(vv)


# --------------------------------------------------------------------------
# pump phase


def pump_phase_from_power(normalized_power, branch="rising"):
    """Pump phase from the interferometer power, which follows sin^2(phi_p)."""
    p = np.asarray(normalized_power, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise DomainError("normalized power must lie in [0, 1]")
    rising = np.arcsin(np.sqrt(p))
    if branch == "rising":
        return rising
    if branch == "falling":
        return np.pi - rising
    raise ValueError(f"branch must be 'rising' or 'falling', not {branch!r}")


def lock_pump_phase(cfg: SourceConfig, angles: EmissionAngles | None = None) -> SourceConfig:
    """Return ``cfg`` with the pump phase that zeroes the relative phase at ``angles``.

    Defaults to the degenerate cone direction (cone_angle, 0).
    """
    if angles is None:
        angles = EmissionAngles(degenerate_cone_angle(cfg.crystal_H, cfg.pump_wavelength), 0.0)
    phase = float(relative_phase_exact(cfg.with_pump_phase(0.0), angles))
    return cfg.with_pump_phase(phase)
