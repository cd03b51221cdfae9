"""Dispersion and birefringence of negative uniaxial crystals.

Wavelengths at this module's boundary are vacuum wavelengths in micrometres,
the convention of every published Sellmeier table.  Lengths are in metres.

Walk-off sign convention: the optic axis of an ``horizontal_xz`` crystal is
tilted from +z toward +x by the cut angle (``vertical_yz``: toward +y).  With
that orientation the walk-off angle returned by :func:`walkoff_perp` is
positive for a negative uniaxial crystal, and the extraordinary longitudinal
wavevector gains ``+q * tan(rho)`` along the tilt direction.  The Poynting
vector then points away from the optic-axis projection, toward -x (-y).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, DomainError

__all__ = [
    "AxisPlane",
    "CrystalSpec",
    "Material",
    "Sellmeier",
    "bbo",
    "index_e_perp",
    "index_extraordinary_principal",
    "index_ordinary",
    "load_materials",
    "walkoff_perp",
]


class AxisPlane(str, enum.Enum):
    HORIZONTAL_XZ = "horizontal_xz"
    VERTICAL_YZ = "vertical_yz"


@dataclass(frozen=True)
class Sellmeier:
    """Coefficients of ``n^2 = a + b / (lambda^2 - c) - d * lambda^2``."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def n_squared(self, wavelength):
        wl2 = np.asarray(wavelength, dtype=float) ** 2
        if self.b == 0.0:
            return self.a - self.d * wl2
        return self.a + self.b / (wl2 - self.c) - self.d * wl2

    def index(self, wavelength):
        return np.sqrt(self.n_squared(wavelength))


@dataclass(frozen=True)
class Material:
    name: str
    sellmeier_o: Sellmeier
    sellmeier_e: Sellmeier
    valid_range: tuple[float, float] = (0.2, 3.0)
    source: str = ""

    def __post_init__(self):
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ConfigError(f"{self.name}: invalid valid_range {self.valid_range}")
        probe = np.linspace(lo, hi, 257)
        for label, coeffs in (("ordinary", self.sellmeier_o), ("extraordinary", self.sellmeier_e)):
            with np.errstate(all="ignore"):
                n2 = coeffs.n_squared(probe)
            if not np.all(np.isfinite(n2)) or np.any(n2 <= 1.0):
                raise ConfigError(
                    f"{self.name}: {label} index is not finite and > 1 on {self.valid_range} um"
                )

    def check_wavelength(self, wavelength):
        wl = np.asarray(wavelength, dtype=float)
        lo, hi = self.valid_range
        if np.any(~np.isfinite(wl)) or np.any(wl < lo) or np.any(wl > hi):
            bad = wl[(wl < lo) | (wl > hi) | ~np.isfinite(wl)].ravel()[0]
            raise DomainError(
                f"wavelength {bad:g} um outside the {self.name} Sellmeier range [{lo:g}, {hi:g}] um"
            )
        return wl


@dataclass(frozen=True)
class CrystalSpec:
    material: Material
    cut_angle: float
    length: float
    axis_plane: AxisPlane = AxisPlane.HORIZONTAL_XZ
    nonlinear_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "axis_plane", AxisPlane(self.axis_plane))
        if not 0.0 <= self.cut_angle <= np.pi / 2:
            raise ConfigError(f"cut angle {self.cut_angle} rad outside [0, pi/2]")
        if not self.length > 0:
            raise ConfigError(f"crystal length must be positive, got {self.length}")

    def rotated(self) -> "CrystalSpec":
        """Identical crystal with the optic axis in the other plane."""
        other = (
            AxisPlane.VERTICAL_YZ
            if self.axis_plane is AxisPlane.HORIZONTAL_XZ
            else AxisPlane.HORIZONTAL_XZ
        )
        return CrystalSpec(self.material, self.cut_angle, self.length, other, self.nonlinear_scale)


def index_ordinary(material: Material, wavelength):
    wl = material.check_wavelength(wavelength)
    return material.sellmeier_o.index(wl)


def index_extraordinary_principal(material: Material, wavelength):
    wl = material.check_wavelength(wavelength)
    return material.sellmeier_e.index(wl)


def _principal(material, wavelength):
    wl = material.check_wavelength(wavelength)
    return material.sellmeier_o.index(wl), material.sellmeier_e.index(wl)


def _e_perp(no, ne, cut):
    if cut == 0.0:
        return no
    if cut == np.pi / 2:
        return ne
    return 1.0 / np.sqrt(np.cos(cut) ** 2 / no**2 + np.sin(cut) ** 2 / ne**2)


def index_e_perp(crystal: CrystalSpec, wavelength):
    """Extraordinary index for a wave travelling along z (the crystal normal)."""
    no, ne = _principal(crystal.material, wavelength)
    return _e_perp(no, ne, crystal.cut_angle)


def _walkoff(no, ne, cut):
    n_perp = _e_perp(no, ne, cut)
    return np.arctan(n_perp**2 * np.sin(cut) * np.cos(cut) * (1.0 / ne**2 - 1.0 / no**2))


def walkoff_perp(crystal: CrystalSpec, wavelength):
    """Walk-off angle (rad) of the extraordinary ray propagating along z.

    Exactly zero for cut angles 0 and pi/2; positive for negative uniaxial
    crystals under the module's orientation convention.
    """
    no, ne = _principal(crystal.material, wavelength)
    cut = crystal.cut_angle
    if cut == 0.0 or cut == np.pi / 2:
        return np.zeros_like(no)
    return _walkoff(no, ne, cut)


_MATERIAL_KEYS = {"sellmeier_o", "sellmeier_e", "valid_range", "source"}


def _coeffs(name, key, value):
    if not isinstance(value, (list, tuple)) or not 1 <= len(value) <= 4:
        raise ConfigError(f"{name}.{key}: expected a list of 1 to 4 numbers [A, B, C, D]")
    try:
        return Sellmeier(*(float(v) for v in value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}.{key}: {exc}") from None


def parse_materials(doc) -> dict[str, Material]:
    if not isinstance(doc, dict) or set(doc) - {"version", "materials"}:
        raise ConfigError("materials file must contain only 'version' and 'materials'")
    entries = doc.get("materials")
    if not isinstance(entries, dict) or not entries:
        raise ConfigError("materials file has no 'materials' mapping")
    out = {}
    for name, entry in entries.items():
        if not isinstance(entry, dict):
            raise ConfigError(f"material {name!r} must be a mapping")
        unknown = set(entry) - _MATERIAL_KEYS
        if unknown:
            raise ConfigError(f"material {name!r}: unknown keys {sorted(unknown)}")
        missing = {"sellmeier_o", "sellmeier_e", "valid_range"} - set(entry)
        if missing:
            raise ConfigError(f"material {name!r}: missing keys {sorted(missing)}")
        rng = entry["valid_range"]
        if not isinstance(rng, (list, tuple)) or len(rng) != 2:
            raise ConfigError(f"material {name!r}: valid_range must be [min_um, max_um]")
        out[name] = Material(
            name=name,
            sellmeier_o=_coeffs(name, "sellmeier_o", entry["sellmeier_o"]),
            sellmeier_e=_coeffs(name, "sellmeier_e", entry["sellmeier_e"]),
            valid_range=(float(rng[0]), float(rng[1])),
            source=str(entry.get("source", "")),
        )
    return out


def load_materials(path: str | Path | None = None) -> dict[str, Material]:
    """Load a materials file; the bundled one when ``path`` is None."""
    if path is None:
        text = resources.files("spdc_slm").joinpath("data/materials.yaml").read_text()
    else:
        text = Path(path).read_text()
    return parse_materials(yaml.safe_load(text))


def bbo() -> Material:
    return load_materials()["BBO"]
