# Flattening the relative phase with a phase-only spatial light modulator.
#
# Run from the repository root:  python demos/03_slm_compensation.py [out_dir]

# %%
import math
import sys
from pathlib import Path

import numpy as np

from spdc_slm import (
    EmissionAngles,
    SlmSpec,
    compensation_pattern,
    degenerate_cone_angle,
    lock_pump_phase,
    panel_coverage,
    panel_grid,
    default_source,
    predicted_visibility_after,
    relative_phase_map,
    uncompensated_visibility,
    write_pgm,
)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %% [markdown]
# A 1920x1080 panel 0.244 m from the crystals, centred on the cone at
# theta_y = 0 with its long side vertical.

# %%
src = default_source()
cone = degenerate_cone_angle(src.crystal_H, src.pump_wavelength)
locked = lock_pump_phase(src, EmissionAngles(cone, 0.0))
slm = SlmSpec()
center = EmissionAngles(cone, 0.0)
cov = panel_coverage(slm, cone, center)
print(f"panel subtends {cov['sector_deg']:.1f} deg of azimuth, {cov['fraction']:.3f} of the half cone")

# %% [markdown]
# Sample the phase on a grid that covers every pixel, keep the illuminated
# annulus and write the inverted, wrapped and quantized map as a PGM.

# %%
grid = panel_grid(slm, center)
grid = grid.with_mask(np.abs(grid.polar_angle() - cone) <= math.radians(1.0))
phase_map = relative_phase_map(locked, grid)
pattern = compensation_pattern(phase_map, slm, center)
write_pgm(out / "pattern.pgm", pattern.pixels)
s = pattern.residual_stats
print(f"pattern written to {out / 'pattern.pgm'}")
print(f"residual over {s['pixels']} pixels: max {s['max']:.3e} rad (pi/255 = {math.pi / 255:.3e}), rms {s['rms']:.3e}")

# %% [markdown]
# Fringe visibility behind the iris, before and after the pattern.

# %%
deg = np.array([2.7, 3.0, 3.3, 3.45, 3.6])
pos = EmissionAngles(np.radians(deg), np.zeros_like(deg))
before = uncompensated_visibility(phase_map, pos)
after = predicted_visibility_after(phase_map, pattern, pos)
for t, b, a in zip(deg, before, after):
    print(f"  theta_x {t:4.2f} deg  V before {b:.4f}  after {a:.5f}")
