"""Longitudinal wavevectors and phase mismatches of the crossed-crystal source.

All transverse wavevectors are free-space quantities in rad/m.  They are
continuous across the crystal faces, so the same ``q`` is used inside and
outside the crystal.  Frequencies are angular frequencies in rad/s.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C
from scipy.optimize import bisect, brentq

from .crystal import AxisPlane, CrystalSpec, Material, _e_perp, _walkoff
from .errors import ContractError, DomainError, NoConeError

__all__ = [
    "EmissionAngles",
    "PlaneWaveMode",
    "angles_to_q",
    "collinear_cut_angle",
    "degenerate_cone_angle",
    "kappa_extraordinary",
    "kappa_ordinary",
    "mismatch_eeo",
    "mismatch_ooe",
    "omega_to_wavelength",
    "q_to_angles",
    "wavelength_to_omega",
]

SMALL_ANGLE_LIMIT = np.radians(10.0)


def wavelength_to_omega(wavelength_um):
    return 2 * np.pi * C / (np.asarray(wavelength_um, dtype=float) * 1e-6)


def omega_to_wavelength(omega):
    return 2 * np.pi * C / np.asarray(omega, dtype=float) * 1e6


@dataclass(frozen=True)
class PlaneWaveMode:
    """One plane-wave component; fields may be equally shaped arrays."""

    omega: object
    qx: object = 0.0
    qy: object = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.omega) <= 0):
            raise DomainError("mode frequency must be positive")

    @property
    def wavelength(self):
        return omega_to_wavelength(self.omega)

    @property
    def q_squared(self):
        return np.asarray(self.qx) ** 2 + np.asarray(self.qy) ** 2


@dataclass(frozen=True)
class EmissionAngles:
    """Free-space emission angles (rad) in the xz and yz planes."""

    theta_x: object
    theta_y: object = 0.0

    def __post_init__(self):
        big = np.maximum(np.abs(self.theta_x), np.abs(self.theta_y))
        if np.any(big > SMALL_ANGLE_LIMIT):
            warnings.warn(
                "emission angle above 10 deg: small-angle model may be inaccurate",
                stacklevel=3,
            )

    @classmethod
    def degrees(cls, theta_x, theta_y=0.0) -> "EmissionAngles":
        return cls(np.radians(theta_x), np.radians(theta_y))


def angles_to_q(omega, angles: EmissionAngles):
    """Invert ``q = tan(theta) * sqrt((omega/c)^2 - |q|^2)`` componentwise."""
    tx = np.tan(angles.theta_x)
    ty = np.tan(angles.theta_y)
    kz = (np.asarray(omega, dtype=float) / C) / np.sqrt(1.0 + tx * tx + ty * ty)
    return tx * kz, ty * kz


def q_to_angles(omega, qx, qy) -> EmissionAngles:
    k0 = np.asarray(omega, dtype=float) / C
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    radicand = k0 * k0 - qx * qx - qy * qy
    if np.any(radicand <= 0):
        raise DomainError("transverse wavevector is evanescent in free space")
    kz = np.sqrt(radicand)
    return EmissionAngles(np.arctan(qx / kz), np.arctan(qy / kz))


def _sqrt_or_raise(radicand, what):
    radicand = np.asarray(radicand, dtype=float)
    if np.any(radicand < 0) or np.any(~np.isfinite(radicand)):
        raise DomainError(f"{what}: evanescent mode (negative radicand)")
    return np.sqrt(radicand)


def _kappa_o(no, omega, q2):
    return np.sqrt((omega * no / C) ** 2 - q2)


def _kappa_e(no, ne, cut, plane, omega, qx, qy):
    """Extraordinary longitudinal wavevector; NaN where evanescent."""
    n_perp = _e_perp(no, ne, cut)
    if cut == 0.0 or cut == np.pi / 2:
        tan_rho = 0.0
    else:
        tan_rho = np.tan(_walkoff(no, ne, cut))
    if plane is AxisPlane.HORIZONTAL_XZ:
        q_along, q_across = qx, qy
    else:
        q_along, q_across = qy, qx
    radicand = (omega / C) ** 2 - q_across**2 / ne**2 - (n_perp / (ne * no)) ** 2 * q_along**2
    with np.errstate(invalid="ignore"):
        return q_along * tan_rho + n_perp * np.sqrt(radicand)


def _indices(material: Material, omega):
    wl = material.check_wavelength(omega_to_wavelength(omega))
    return material.sellmeier_o.index(wl), material.sellmeier_e.index(wl)


def kappa_ordinary(mode: PlaneWaveMode, material: Material):
    no, _ = _indices(material, mode.omega)
    omega = np.asarray(mode.omega, dtype=float)
    radicand = (omega * no / C) ** 2 - mode.q_squared
    return _sqrt_or_raise(radicand, "ordinary wave")


def kappa_extraordinary(mode: PlaneWaveMode, crystal: CrystalSpec):
    """Longitudinal wavevector of the extraordinary wave in ``crystal``.

    The walk-off term multiplies q_x for a horizontal_xz crystal and q_y for a
    vertical_yz crystal.
    """
    no, ne = _indices(crystal.material, mode.omega)
    omega = np.asarray(mode.omega, dtype=float)
    qx = np.asarray(mode.qx, dtype=float)
    qy = np.asarray(mode.qy, dtype=float)
    value = _kappa_e(no, ne, crystal.cut_angle, crystal.axis_plane, omega, qx, qy)
    if np.any(np.isnan(value)):
        raise DomainError("extraordinary wave: evanescent mode (negative radicand)")
    return value


def _check_conservation(pump, signal, idler, rtol=1e-9):
    wp = np.asarray(pump.omega, dtype=float)
    ws = np.asarray(signal.omega, dtype=float) + np.asarray(idler.omega, dtype=float)
    if np.any(np.abs(wp - ws) > rtol * np.abs(wp)):
        raise ContractError("energy conservation violated: omega_p != omega_1 + omega_2")
    scale = rtol * wp / C
    for axis in ("qx", "qy"):
        qp = np.asarray(getattr(pump, axis), dtype=float)
        qs = np.asarray(getattr(signal, axis), dtype=float) + np.asarray(getattr(idler, axis), dtype=float)
        if np.any(np.abs(qp - qs) > scale):
            raise ContractError(f"transverse momentum violated along {axis[1]}: q_p != q_1 + q_2")


def mismatch_ooe(crystal: CrystalSpec, pump: PlaneWaveMode, signal: PlaneWaveMode, idler: PlaneWaveMode):
    """Pump extraordinary, signal and idler ordinary: the down-converting mismatch."""
    _check_conservation(pump, signal, idler)
    m = crystal.material
    return (
        kappa_extraordinary(pump, crystal)
        - kappa_ordinary(signal, m)
        - kappa_ordinary(idler, m)
    )


def mismatch_eeo(crystal: CrystalSpec, pump: PlaneWaveMode, signal: PlaneWaveMode, idler: PlaneWaveMode):
    """Pump ordinary, pair extraordinary: pairs from the other crystal crossing ``crystal``."""
    _check_conservation(pump, signal, idler)
    return (
        kappa_ordinary(pump, crystal.material)
        - kappa_extraordinary(signal, crystal)
        - kappa_extraordinary(idler, crystal)
    )


def _degenerate_ooe(crystal: CrystalSpec, pump_wavelength, theta):
    wp = float(wavelength_to_omega(pump_wavelength))
    w = wp / 2
    qx, qy = angles_to_q(w, EmissionAngles(theta, 0.0))
    return float(
        mismatch_ooe(
            crystal,
            PlaneWaveMode(wp),
            PlaneWaveMode(w, qx, qy),
            PlaneWaveMode(w, -qx, -qy),
        )
    )


def degenerate_cone_angle(crystal: CrystalSpec, pump_wavelength, bracket=(0.0, np.radians(10.0)), xtol=1e-10):
    """External half-opening angle (rad) of the degenerate phase-matched cone."""
    lo, hi = bracket
    f_lo = _degenerate_ooe(crystal, pump_wavelength, lo)
    f_hi = _degenerate_ooe(crystal, pump_wavelength, hi)
    if f_lo == 0.0:
        return lo
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoConeError(
            f"no phase-matched cone between {np.degrees(lo):g} and {np.degrees(hi):g} deg "
            f"for cut angle {np.degrees(crystal.cut_angle):g} deg"
        )
    return bisect(lambda t: _degenerate_ooe(crystal, pump_wavelength, t), lo, hi, xtol=xtol, maxiter=200)


def collinear_cut_angle(material: Material, pump_wavelength, bracket=(np.radians(1.0), np.radians(89.0))):
    """Cut angle at which degenerate type-I emission is collinear."""
    n_target = material.sellmeier_o.index(material.check_wavelength(2 * pump_wavelength))
    no_p, ne_p = _indices(material, wavelength_to_omega(pump_wavelength))

    def f(cut):
        return float(_e_perp(no_p, ne_p, cut) - n_target)

    lo, hi = bracket
    if np.sign(f(lo)) == np.sign(f(hi)):
        raise NoConeError("no collinear phase-matching cut angle in bracket")
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
