"""Flat experiment configuration for the reproduction commands.

Precedence, lowest first: built-in defaults, the YAML config file, command
line overrides.  Every key is listed in :data:`SCHEMA` with its unit; unknown
keys are rejected and the whole configuration is validated before anything is
computed.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .biphoton import SourceConfig, default_source
from .crystal import bbo, load_materials
from .errors import ConfigError
from .fileio import read_lut
from .phasematching import EmissionAngles
from .slm import SlmSpec

__all__ = ["DEFAULT_CONFIG_NAME", "SCHEMA", "ExperimentConfig", "load_config"]

DEFAULT_CONFIG_NAME = "spdc_slm.yaml"

# key: (type, unit / meaning)
SCHEMA = {
    "material": (str, "crystal material name in the materials file"),
    "materials_file": (str, "optional YAML materials file; bundled table when empty"),
    "cut_angle_deg": (float, "deg, crystal cut angle"),
    "crystal_length_m": (float, "m, length of each crystal"),
    "pump_wavelength_um": (float, "um, pump centre wavelength"),
    "pump_coherence_time_s": (float, "s, pump coherence time"),
    "pump_phase": (str, "'lock' (zero relative phase at the cone centre) or radians"),
    "filter_center_um": (float, "um, interference-filter centre"),
    "filter_fwhm_um": (float, "um, interference-filter FWHM"),
    "filter_shape": (str, "gaussian | rect"),
    "grid_points": (int, "samples per axis of the map grid"),
    "annulus_half_width_deg": (float, "deg, half width of the annular map mask"),
    "slm_width_m": (float, "m, active panel width"),
    "slm_height_m": (float, "m, active panel height"),
    "slm_cols": (int, "pixels along the width"),
    "slm_rows": (int, "pixels along the height"),
    "slm_bit_depth": (int, "bits per gray level"),
    "slm_distance_m": (float, "m, crystal to panel distance"),
    "slm_lut_file": (str, "optional gray-to-phase LUT file; linear 0..2pi when empty"),
    "slm_loss_factor": (float, "scalar transmission loss of the panel"),
    "slm_long_axis": (str, "horizontal | vertical orientation of the panel width"),
    "pattern_model": (str, "exact | quadratic phase model loaded onto the panel"),
    "pattern_spacing_deg": (float, "deg, sampling of the phase map behind the pattern"),
    "scan_positions_deg": (list, "deg, theta_x of the iris positions (theta_y = 0)"),
    "visibility_positions_deg": (list, "deg, theta_x of the visibility positions"),
    "iris_diameter_m": (float, "m, iris diameter"),
    "iris_distance_m": (float, "m, crystal to iris distance"),
    "iris_order": (int, "Gauss order of the iris quadrature"),
    "output_dir": (str, "directory for all written files"),
    "write_png": (bool, "also write an 8-bit PNG of the pattern (needs Pillow)"),
    "residual_stride": (int, "write every n-th covered pixel to the residual CSV"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    material: str = "BBO"
    materials_file: str = ""
    cut_angle_deg: float = 29.3
    crystal_length_m: float = 0.5e-3
    pump_wavelength_um: float = 0.405
    pump_coherence_time_s: float = 300e-15
    pump_phase: str = "lock"
    filter_center_um: float = 0.810
    filter_fwhm_um: float = 0.010
    filter_shape: str = "gaussian"
    grid_points: int = 256
    annulus_half_width_deg: float = 1.0
    slm_width_m: float = 15.36e-3
    slm_height_m: float = 8.64e-3
    slm_cols: int = 1920
    slm_rows: int = 1080
    slm_bit_depth: int = 8
    slm_distance_m: float = 0.244
    slm_lut_file: str = ""
    slm_loss_factor: float = 0.4
    slm_long_axis: str = "vertical"
    pattern_model: str = "exact"
    pattern_spacing_deg: float = 0.01
    scan_positions_deg: tuple = (2.4, 2.6, 2.8, 3.0, 3.2, 3.4, 3.6, 3.8, 4.0)
    visibility_positions_deg: tuple = (2.7, 3.0, 3.3, 3.45, 3.6)
    iris_diameter_m: float = 2e-3
    iris_distance_m: float = 0.5
    iris_order: int = 6
    output_dir: str = "out"
    write_png: bool = False
    residual_stride: int = 4

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _coerce(f.name, getattr(self, f.name)))
        self._validate()

    def _validate(self):
        positive = [
            "crystal_length_m", "pump_wavelength_um", "pump_coherence_time_s", "filter_center_um",
            "filter_fwhm_um", "annulus_half_width_deg", "slm_width_m", "slm_height_m",
            "slm_distance_m", "pattern_spacing_deg", "iris_diameter_m", "iris_distance_m",
        ]
        for key in positive:
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")
        if not 0 <= self.cut_angle_deg <= 90:
            raise ConfigError(f"cut_angle_deg must lie in [0, 90], got {self.cut_angle_deg}")
        if self.grid_points < 3:
            raise ConfigError("grid_points must be at least 3")
        for key in ("slm_cols", "slm_rows", "iris_order", "residual_stride"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be at least 1")
        if not 1 <= self.slm_bit_depth <= 16:
            raise ConfigError("slm_bit_depth must lie in [1, 16]")
        if self.pump_phase != "lock":
            try:
                float(self.pump_phase)
            except ValueError:
                raise ConfigError(f"pump_phase must be 'lock' or a number, got {self.pump_phase!r}") from None
        choices = {"filter_shape": ("gaussian", "rect"), "slm_long_axis": ("horizontal", "vertical"), "pattern_model": ("exact", "quadratic")}
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {allowed}, got {getattr(self, key)!r}")
        for key in ("scan_positions_deg", "visibility_positions_deg"):
            if len(getattr(self, key)) == 0:
                raise ConfigError(f"{key} must not be empty")
        if self.iris_diameter_m >= self.iris_distance_m:
            raise ConfigError("iris must subtend a small angle (diameter < distance)")

    # builders -----------------------------------------------------------

    def source(self) -> SourceConfig:
        """Source configuration; the pump phase is left at zero when 'lock'."""
        materials = load_materials(self.materials_file or None) if self.materials_file else {"BBO": bbo()}
        if self.material not in materials:
            raise ConfigError(f"material {self.material!r} not in {sorted(materials)}")
        phase = 0.0 if self.pump_phase == "lock" else float(self.pump_phase)
        return default_source(
            cut_angle_deg=self.cut_angle_deg,
            length=self.crystal_length_m,
            pump_wavelength=self.pump_wavelength_um,
            material=materials[self.material],
            pump_coherence_time=self.pump_coherence_time_s,
            pump_phase=phase,
            filter_center=self.filter_center_um,
            filter_fwhm=self.filter_fwhm_um,
            filter_shape=self.filter_shape,
        )

    def slm(self) -> SlmSpec:
        lut = read_lut(self.slm_lut_file, self.slm_bit_depth) if self.slm_lut_file else None
        return SlmSpec(
            width=self.slm_width_m,
            height=self.slm_height_m,
            cols=self.slm_cols,
            rows=self.slm_rows,
            bit_depth=self.slm_bit_depth,
            distance=self.slm_distance_m,
            gray_to_phase=lut,
            loss_factor=self.slm_loss_factor,
            long_axis=self.slm_long_axis,
        )

    def positions(self, key="visibility_positions_deg") -> EmissionAngles:
        tx = np.radians(np.asarray(getattr(self, key), float))
        return EmissionAngles(tx, np.zeros_like(tx))

    def updated(self, **overrides) -> "ExperimentConfig":
        _check_keys(overrides)
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {f.name: list(v) if isinstance(v := getattr(self, f.name), tuple) else v for f in fields(self)}


def _check_keys(mapping):
    unknown = set(mapping) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")


def _coerce(key, value):
    kind = SCHEMA[key][0]
    try:
        if kind is list:
            if isinstance(value, (int, float)):
                value = [value]
            if isinstance(value, str):
                value = [v for v in value.replace(",", " ").split()]
            return tuple(float(v) for v in value)
        if kind is bool:
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind is float:
            out = float(value)
            if not np.isfinite(out):
                raise ValueError(value)
            return out
        return str(value) if value is not None else ""
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot interpret {value!r} as {kind.__name__}") from None


def load_config(path=None, overrides=None, search_cwd=True) -> ExperimentConfig:
    """Defaults, then the file at ``path`` (or ``./spdc_slm.yaml``), then overrides."""
    values = {}
    if path is None and search_cwd and Path(DEFAULT_CONFIG_NAME).is_file():
        path = DEFAULT_CONFIG_NAME
    if path is not None:
        try:
            doc = yaml.safe_load(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        _check_keys(doc)
        values.update(doc)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    _check_keys(overrides)
    values.update(overrides)
    return ExperimentConfig(**values)
