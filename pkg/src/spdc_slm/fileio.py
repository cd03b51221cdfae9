"""File formats: scalar maps, scans, SLM patterns, LUTs and residual reports.

Scalar-map raster (``.smap``), all little-endian::

    8 bytes   magic b"SPDCMAP1"
    uint32    n = length of the JSON header in bytes
    n bytes   UTF-8 JSON {"unit": str, "nx": int, "ny": int, "dropped": int}
    nx f8     theta_x axis (rad)
    ny f8     theta_y axis (rad)
    ny*nx f8  values, row-major [iy, ix]
    ny*nx u1  mask (0/1), row-major [iy, ix]

Every writer here is deterministic: identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .biphoton import EmissionGrid, ScalarMap
from .errors import CalibrationError, ConfigError

__all__ = [
    "load_map_csv",
    "load_map_raster",
    "read_lut",
    "read_pgm",
    "save_map_csv",
    "save_map_raster",
    "write_lut",
    "write_pgm",
    "write_png",
    "write_residual_csv",
    "write_scan_csv",
]

MAGIC = b"SPDCMAP1"


def _fmt(x) -> str:
    return "%.17g" % x


def save_map_csv(path, smap: ScalarMap):
    tx, ty = smap.grid.mesh()
    lines = [f"# unit={smap.unit.value}", "theta_x,theta_y,value,mask"]
    for a, b, v, m in zip(tx.ravel(), ty.ravel(), smap.values.ravel(), smap.grid.mask.ravel()):
        lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(v)},{int(m)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_map_csv(path) -> ScalarMap:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# unit="):
        raise ConfigError(f"{path}: missing '# unit=' header")
    unit = text[0].split("=", 1)[1].strip()
    data = np.loadtxt(text[2:], delimiter=",", ndmin=2)
    tx_axis = np.unique(data[:, 0])
    ty_axis = np.unique(data[:, 1])
    shape = (ty_axis.size, tx_axis.size)
    if data.shape[0] != shape[0] * shape[1]:
        raise ConfigError(f"{path}: samples do not form a rectangular grid")
    values = data[:, 2].reshape(shape)
    mask = data[:, 3].reshape(shape).astype(bool)
    return ScalarMap(EmissionGrid(tx_axis, ty_axis, mask), values, unit)


def save_map_raster(path, smap: ScalarMap):
    g = smap.grid
    header = json.dumps(
        {"unit": smap.unit.value, "nx": int(g.theta_x_axis.size), "ny": int(g.theta_y_axis.size), "dropped": smap.dropped},
        sort_keys=True,
    ).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(g.theta_x_axis.astype("<f8").tobytes())
        fh.write(g.theta_y_axis.astype("<f8").tobytes())
        fh.write(smap.values.astype("<f8").tobytes())
        fh.write(g.mask.astype("u1").tobytes())


def load_map_raster(path) -> ScalarMap:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ConfigError(f"{path}: not a scalar-map raster")
    (n,) = struct.unpack_from("<I", raw, 8)
    header = json.loads(raw[12 : 12 + n])
    nx, ny = header["nx"], header["ny"]
    off = 12 + n
    tx = np.frombuffer(raw, "<f8", nx, off)
    off += 8 * nx
    ty = np.frombuffer(raw, "<f8", ny, off)
    off += 8 * ny
    values = np.frombuffer(raw, "<f8", nx * ny, off).reshape(ny, nx)
    off += 8 * nx * ny
    mask = np.frombuffer(raw, "u1", nx * ny, off).reshape(ny, nx).astype(bool)
    if off + nx * ny != len(raw):
        raise ConfigError(f"{path}: trailing or missing bytes")
    return ScalarMap(EmissionGrid(tx.astype(float), ty.astype(float), mask), values.astype(float), header["unit"], header["dropped"])


# --------------------------------------------------------------------------
# images


def write_pgm(path, pixels, maxval=255):
    """Binary PGM (P5), rows top to bottom; 16-bit samples are big-endian."""
    img = np.asarray(pixels)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    if img.min(initial=0) < 0 or img.max(initial=0) > maxval:
        raise ValueError(f"gray values outside [0, {maxval}]")
    dtype = ">u2" if maxval > 255 else "u1"
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, dtype=dtype).tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while not raw[end : end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(f) for f in fields[1:])
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(raw, dtype, rows * cols, pos).reshape(rows, cols).copy()


def write_png(path, pixels):
    """8-bit grayscale PNG mirror of a pattern (needs Pillow)."""
    from PIL import Image

    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="L").save(path, optimize=False)


# --------------------------------------------------------------------------
# LUT, residuals, scans


def write_lut(path, lut, comment=""):
    lines = [f"# {line}" for line in comment.splitlines()] + ["# gray phase_radians"]
    lines += [f"{g} {_fmt(p)}" for g, p in enumerate(np.asarray(lut, float))]
    Path(path).write_text("\n".join(lines) + "\n")


def read_lut(path, bit_depth=8) -> np.ndarray:
    """Read ``gray phase`` lines; every gray level must appear exactly once."""
    entries = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise CalibrationError(f"{path}:{n}: expected 'gray phase_radians'")
        gray, phase = int(parts[0]), float(parts[1])
        if gray in entries:
            raise CalibrationError(f"{path}:{n}: duplicate gray level {gray}")
        entries[gray] = phase
    if sorted(entries) != list(range(2**bit_depth)):
        raise CalibrationError(f"{path}: LUT must list every gray level 0..{2**bit_depth - 1}")
    return np.array([entries[g] for g in range(2**bit_depth)])


def write_residual_csv(path, pattern, stride=1):
    """Per covered pixel: col,row,theta_x,theta_y,residual_rad, then a summary line."""
    from .slm import pixel_to_angles

    rows, cols = np.nonzero(pattern.coverage_mask)
    keep = (rows % stride == 0) & (cols % stride == 0)
    rows, cols = rows[keep], cols[keep]
    ang = pixel_to_angles(pattern.slm, cols, rows, pattern.panel_center)
    table = np.column_stack([cols, rows, ang.theta_x, ang.theta_y, pattern.residual[rows, cols]])
    s = pattern.residual_stats
    with open(path, "w") as fh:
        fh.write("col,row,theta_x,theta_y,residual_rad\n")
        np.savetxt(fh, table, fmt=["%d", "%d", "%.17g", "%.17g", "%.17g"], delimiter=",")
        fh.write(
            f"# summary covered_pixels={s['pixels']} max_abs={_fmt(s['max'])} "
            f"mean_abs={_fmt(s['mean'])} rms={_fmt(s['rms'])}\n"
        )


def write_scan_csv(path, theta_x, columns: dict, summary: dict | None = None):
    """Scan table: theta_x_deg plus one column per entry of ``columns``."""
    names = list(columns)
    with open(path, "w") as fh:
        fh.write(",".join(["theta_x_deg"] + names) + "\n")
        for i, t in enumerate(np.degrees(np.asarray(theta_x, float))):
            fh.write(",".join([_fmt(t)] + [_fmt(columns[k][i]) for k in names]) + "\n")
        for key, value in (summary or {}).items():
            fh.write(f"# {key}={value if isinstance(value, str) else _fmt(value)}\n")
