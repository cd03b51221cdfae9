# Crossed-crystal source: indices, walk-off and the degenerate emission cone.
#
# Run from the repository root:  python demos/01_source_geometry.py

# %%
import math

import numpy as np

from spdc_slm import (
    NoConeError,
    bbo,
    collinear_cut_angle,
    degenerate_cone_angle,
    index_e_perp,
    index_extraordinary_principal,
    index_ordinary,
    default_source,
    walkoff_perp,
)

# %% [markdown]
# The default source pumps two 0.5 mm BBO crystals, cut at 29.3 deg, with
# 405 nm light.  The second crystal is the first turned by 90 deg about the
# pump, so it emits the vertically polarized pairs.

# %%
src = default_source()
material = bbo()
print(f"material: {material.name}, Sellmeier range {material.valid_range} um")
for wl in (0.405, 0.810):
    print(
        f"  {wl * 1e3:.0f} nm  n_o {index_ordinary(material, wl):.6f}"
        f"  n_e {index_extraordinary_principal(material, wl):.6f}"
        f"  n_e_perp {index_e_perp(src.crystal_H, wl):.6f}"
        f"  walk-off {math.degrees(walkoff_perp(src.crystal_H, wl)):.3f} deg"
    )

# %% [markdown]
# Degenerate 810 nm pairs leave on a cone around the pump.  Its half-opening
# angle is where the ordinary-ordinary-extraordinary mismatch vanishes.

# %%
cone = degenerate_cone_angle(src.crystal_H, src.pump_wavelength)
print(f"cone half-opening angle: {math.degrees(cone):.4f} deg")

# %% [markdown]
# Below the collinear cut there is no cone at all; above it the cone opens
# roughly like the square root of the extra cut angle.

# %%
collinear = collinear_cut_angle(material, 0.405)
print(f"collinear cut: {math.degrees(collinear):.3f} deg")
for cut_deg in (28.0, 29.0, 29.3, 30.0, 32.0):
    try:
        angle = degenerate_cone_angle(default_source(cut_deg).crystal_H, 0.405)
        print(f"  cut {cut_deg:5.1f} deg -> cone {math.degrees(angle):.3f} deg")
    except NoConeError as exc:
        print(f"  cut {cut_deg:5.1f} deg -> no cone ({exc})")

extra = np.radians([0.1, 0.4, 1.6])
cones = [degenerate_cone_angle(default_source(math.degrees(collinear + e)).crystal_H, 0.405) for e in extra]
print("cone / sqrt(extra cut):", np.round(np.array(cones) / np.sqrt(extra), 4))
