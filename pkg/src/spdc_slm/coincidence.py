"""Polarization-projected coincidence model.

A slow detector integrates over t_1 and t_2, which removes every frequency
cross term; what remains is a single integral over the signal frequency with
the idler fixed by energy conservation against the central pump frequency.
Under a plane-wave pump the idler direction is the mirror of the signal, so
no idler angular integral is left either.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C
from scipy.integrate import quad_vec

from .biphoton import EmissionGrid, MapUnit, ScalarMap, SourceConfig, _amplitudes_unchecked
from .errors import DomainError
from .phasematching import EmissionAngles, wavelength_to_omega

__all__ = [
    "FilterProfile",
    "Fringe",
    "Projector",
    "VisibilityFit",
    "coincidence_density",
    "coincidence_map",
    "disc_nodes",
    "hwp_fringe",
    "pair_density",
    "profile_fwhm",
    "radial_scan",
    "visibility",
]

QUAD_EPSREL = 1e-8
DEFAULT_IRIS_ORDER = 6


@dataclass(frozen=True)
class Projector:
    """Analyzer orientations e1, e2 (unit vectors in the H/V basis)."""

    e1: tuple[float, float]
    e2: tuple[float, float]

    def __post_init__(self):
        for name in ("e1", "e2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (2,) or abs(np.hypot(*v) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit 2-vector, got {v}")
            object.__setattr__(self, name, (float(v[0]), float(v[1])))

    @classmethod
    def linear(cls, angle1, angle2) -> "Projector":
        """Analyzers transmitting linear polarization at the given angles from H."""
        return cls((np.cos(angle1), np.sin(angle1)), (np.cos(angle2), np.sin(angle2)))

    @classmethod
    def from_hwp(cls, hwp1, hwp2) -> "Projector":
        """Half-wave plates at ``hwp1``/``hwp2`` in front of H-transmitting polarizers."""
        return cls.linear(2 * hwp1, 2 * hwp2)

    @property
    def weights(self):
        """(e1x e2x, e1y e2y): the only products a phi-type state can reach."""
        return self.e1[0] * self.e2[0], self.e1[1] * self.e2[1]


_s = np.sqrt(0.5)
Projector.HH = Projector((1.0, 0.0), (1.0, 0.0))
Projector.VV = Projector((0.0, 1.0), (0.0, 1.0))
Projector.HV = Projector((1.0, 0.0), (0.0, 1.0))
Projector.VH = Projector((0.0, 1.0), (1.0, 0.0))
Projector.PP = Projector((_s, _s), (_s, _s))
Projector.PM = Projector((_s, _s), (_s, -_s))


@dataclass(frozen=True)
class FilterProfile:
    center: float
    fwhm: float
    shape: str = "gaussian"

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError("filter FWHM must be positive")
        if self.shape not in ("gaussian", "rect"):
            raise ValueError(f"unknown filter shape {self.shape!r}")

    @classmethod
    def of(cls, cfg: SourceConfig) -> "FilterProfile":
        return cls(cfg.filter_center, cfg.filter_fwhm, cfg.filter_shape)

    def transmissivity(self, wavelength):
        """Power transmission |G|^2 in [0, 1]."""
        wl = np.asarray(wavelength, dtype=float)
        if self.shape == "rect":
            return (np.abs(wl - self.center) <= 0.5 * self.fwhm).astype(float)
        return np.exp(-4 * np.log(2) * ((wl - self.center) / self.fwhm) ** 2)


def _signal_band(cfg: SourceConfig):
    """Signal-frequency interval where both filter arms transmit."""
    lo, hi = cfg.band_limits
    w_lo, w_hi = float(wavelength_to_omega(hi)), float(wavelength_to_omega(lo))
    wp = cfg.pump_omega
    a, b = max(w_lo, wp - w_hi), min(w_hi, wp - w_lo)
    if not a < b:
        raise DomainError("filter passbands do not overlap for any energy-conserving pair")
    return a, b


def _integrate(cfg: SourceConfig, angles: EmissionAngles, combine, phase_offset=0.0):
    """Integrate ``|G(w)G(wp - w)|^2 * combine(Phi_HH, Phi_VV)`` over the band."""
    filt = FilterProfile.of(cfg)
    wp = cfg.pump_omega
    tx = np.asarray(angles.theta_x, dtype=float)
    ty = np.asarray(angles.theta_y, dtype=float)
    tx, ty = np.broadcast_arrays(tx, ty)
    two_pi_c = 2 * np.pi * C * 1e6

    def integrand(w):
        weight = filt.transmissivity(two_pi_c / w) * filt.transmissivity(two_pi_c / (wp - w))
        qx, qy = _q(w, tx, ty)
        hh, vv = _amplitudes_unchecked(cfg, w, wp - w, qx, qy, phase_offset)
        return weight * combine(hh, vv)

    a, b = _signal_band(cfg)
    # absolute floor far below any physical density, so all-zero projections terminate
    scale = (cfg.length * max(cfg.crystal_H.nonlinear_scale, cfg.crystal_V.nonlinear_scale)) ** 2
    scale *= cfg.pump_coherence_time / np.sqrt(np.pi) * (b - a)
    value, _ = quad_vec(integrand, a, b, epsrel=QUAD_EPSREL, epsabs=1e-14 * scale, norm="max")
    if np.any(~np.isfinite(value)):
        raise DomainError("evanescent mode inside the detection band")
    return value


def _q(w, tx, ty):
    ttx, tty = np.tan(tx), np.tan(ty)
    kz = (w / C) / np.sqrt(1.0 + ttx * ttx + tty * tty)
    return ttx * kz, tty * kz


def _projected(proj: Projector):
    a, b = proj.weights

    def combine(hh, vv):
        return np.abs(a * hh + b * vv) ** 2

    return combine


def coincidence_density(cfg: SourceConfig, proj: Projector, angles: EmissionAngles, phase_offset=0.0):
    """Unnormalized coincidence probability density at the signal direction(s).

    ``phase_offset`` is added to the local relative phase (e.g. by a
    compensating element in one arm).
    """
    return _integrate(cfg, angles, _projected(proj), phase_offset)


def pair_density(cfg: SourceConfig, angles: EmissionAngles):
    """Projector-free pair density, sum of |Phi_HH|^2 and |Phi_VV|^2."""
    return _integrate(cfg, angles, lambda hh, vv: np.abs(hh) ** 2 + np.abs(vv) ** 2)


def coincidence_map(cfg: SourceConfig, proj: Projector, grid: EmissionGrid) -> ScalarMap:
    """Coincidence density on a grid, normalized to 1 at its masked-in maximum."""
    values = coincidence_density(cfg, proj, grid.angles())
    peak = values[grid.mask].max()
    if peak <= 0:
        raise DomainError("coincidence density vanishes on the whole grid")
    return ScalarMap(grid, values / peak, MapUnit.ARBITRARY)


# --------------------------------------------------------------------------
# iris scans


def disc_nodes(radius, order=DEFAULT_IRIS_ORDER):
    """Tensor quadrature on a disc: Gauss-Legendre in r, trapezoid in azimuth.

    Returns (dx, dy, weights) with weights summing to 1.
    """
    xg, wg = np.polynomial.legendre.leggauss(order)
    r = 0.5 * radius * (xg + 1)
    wr = wg * r
    n_phi = 2 * order + 2
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    w = np.repeat(wr[:, None], n_phi, axis=1)
    w = w / w.sum()
    return (rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), w.ravel()


def iris_footprint(center: EmissionAngles, iris_diameter, distance, order=DEFAULT_IRIS_ORDER):
    """Directions through an iris at ``distance``; returns (angles, weights).

    The returned angles have shape (n_positions, n_nodes).
    """
    if not distance > 0 or not iris_diameter > 0:
        raise ValueError("iris diameter and distance must be positive")
    dx, dy, w = disc_nodes(0.5 * iris_diameter, order)
    xc = distance * np.tan(np.atleast_1d(np.asarray(center.theta_x, dtype=float)))
    yc = distance * np.tan(np.atleast_1d(np.asarray(center.theta_y, dtype=float)))
    xc, yc = np.broadcast_arrays(xc, yc)
    x = xc[:, None] + dx[None, :]
    y = yc[:, None] + dy[None, :]
    return EmissionAngles(np.arctan(x / distance), np.arctan(y / distance)), w


def radial_scan(
    cfg: SourceConfig,
    proj: Projector,
    thetas: EmissionAngles,
    iris_diameter=2e-3,
    distance=0.5,
    order=DEFAULT_IRIS_ORDER,
    density=None,
):
    """Iris-averaged coincidence rate at each position, normalized to max 1.

    ``density(angles)`` replaces the model density when given.
    """
    angles, w = iris_footprint(thetas, iris_diameter, distance, order)
    if density is None:
        values = coincidence_density(cfg, proj, angles)
    else:
        values = np.broadcast_to(np.asarray(density(angles), dtype=float), angles.theta_x.shape)
    counts = values @ w
    return counts / counts.max()


def profile_fwhm(x, y):
    """Full width at half maximum of a single-peaked sampled profile."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    half = 0.5 * y[i]
    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise ValueError("profile does not fall below half maximum on both sides")
    j = left[-1]
    xl = np.interp(half, [y[j], y[j + 1]], [x[j], x[j + 1]])
    k = i + right[0]
    xr = np.interp(half, [y[k], y[k - 1]], [x[k], x[k - 1]])
    return xr - xl


# --------------------------------------------------------------------------
# fringes and visibility


@dataclass(frozen=True)
class Fringe:
    """Coincidence counts versus the HWP_1 angle (rad)."""

    angles: np.ndarray
    counts: np.ndarray
    harmonic: int = 4


def hwp_fringe(cfg: SourceConfig, hwp1_angles, hwp2_angle, angles: EmissionAngles, compensated_phase=0.0) -> Fringe:
    """Counts while HWP_1 rotates and HWP_2 stays fixed.

    The local relative phase is the source's relative phase at ``angles`` plus
    ``compensated_phase``.
    """
    hwp1 = np.asarray(hwp1_angles, dtype=float)
    theta = EmissionAngles(np.full(hwp1.shape, float(angles.theta_x)), np.full(hwp1.shape, float(angles.theta_y)))
    a = np.cos(2 * hwp1) * np.cos(2 * hwp2_angle)
    b = np.sin(2 * hwp1) * np.sin(2 * hwp2_angle)

    def combine(hh, vv):
        return np.abs(a * hh + b * vv) ** 2

    counts = _integrate(cfg, theta, combine, compensated_phase)
    return Fringe(hwp1, counts)


@dataclass(frozen=True)
class VisibilityFit:
    visibility: float
    offset: float
    amplitude: float
    phase: float
    residual: float


def visibility(fringe: Fringe) -> VisibilityFit:
    """Visibility (max - min)/(max + min) of a least-squares sinusoid fit.

    ``residual`` is the RMS misfit relative to the fitted offset.
    """
    x = np.asarray(fringe.angles, dtype=float)
    y = np.asarray(fringe.counts, dtype=float)
    n = fringe.harmonic
    period = 2 * np.pi / n
    if x.size < 3:
        raise ValueError("need at least three fringe samples")
    step = np.min(np.diff(np.sort(x))) if x.size > 1 else 0.0
    if np.ptp(x) + step < period * (1 - 1e-9):
        raise ValueError("fringe must sample at least one full period")
    design = np.column_stack([np.ones_like(x), np.cos(n * x), np.sin(n * x)])
    (c0, c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    amp = float(np.hypot(c1, c2))
    if not c0 > 0:
        raise DomainError("visibility undefined for a fringe with zero mean")
    fit = design @ np.array([c0, c1, c2])
    resid = float(np.sqrt(np.mean((y - fit) ** 2)) / c0)
    return VisibilityFit(min(amp / c0, 1.0), float(c0), amp, float(np.arctan2(c2, c1)), resid)
