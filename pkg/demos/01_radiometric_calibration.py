"""
Radiometric calibration walkthrough
===================================

Raw sensor counts are turned into surface reflectance in three steps:
a radial vignette correction, a count-to-radiance conversion, and a
scale factor derived from an image of a reflectance panel with known
albedo. This script fabricates a raw frame, runs the chain, and checks
that the panel region comes back at its catalog reflectance.
"""

import numpy as np

from weedmap import (
    PanelSpec,
    RadiometricParams,
    calibrate_band,
    radiance_plane,
    reflectance_factor,
    vignette_factor,
)

# sensor constants of one narrowband channel: 12-bit counts, short
# exposure, mild vignette centered in the frame
params = RadiometricParams(
    a1=0.86, a2=1.1e-6, a3=2.5e-4,
    exposure_s=0.00175, gain=2.0,
    black_level=0.0478, bit_depth=12,
    vignette_center=(480.0, 640.0),
    vignette_coeffs=(2.0e-4, 1.2e-7, 0.0, 0.0, 0.0, 0.0),
)

# the vignette gain is 1 at the optical center and falls off with radius
print("vignette gain along the main diagonal:")
for step in (0, 160, 320, 480):
    v = vignette_factor(480 - step, 640 - step, params)
    print(f"  at radius {step * 2 ** 0.5:6.1f} px: {v:.4f}")

# fabricate what the sensor records for a uniformly lit panel: the
# scene radiance is constant, so invert the model (vignette falloff,
# black level, column-dependent exposure term) to get raw counts
rng = np.random.default_rng(0)
h, w = 960, 1280
ii, jj = np.mgrid[0:h, 0:w]
target = rng.normal(95.0, 0.8, size=(h, w))   # near-flat radiance field
v = vignette_factor(ii, jj, params)
denom = (params.exposure_s + params.a2 * jj
         - params.a3 * params.exposure_s * jj)
p_bar = target * (params.gain / params.a1) * denom / v + params.black_level
raw = np.clip(np.round(p_bar * 2 ** params.bit_depth), 0, 4095)
raw = raw.astype(np.uint16)
print(f"\nraw panel frame: {raw.min()}..{raw.max()} DN "
      f"(corner {raw[0, 0]} DN, center {raw[480, 640]} DN: the frame "
      f"is far from flat)")

# the radiance model undoes all of that: the plane comes back flat
rad = radiance_plane(raw, params)
print(f"radiance plane: mean {rad.mean():.3f}, "
      f"spread {rad.std() / rad.mean():.2%} (injected noise was "
      f"{0.8 / 95.0:.2%})")

# the panel's catalog albedo for this band, and where it sits in frame
panel = PanelSpec(rho=0.49, region=(540, 380, 200, 200))
factor = reflectance_factor(raw, panel, params)
print(f"\nradiance-to-reflectance factor: {factor:.6g}")

band = calibrate_band(raw, params, factor, name="red", center_nm=668.0)
x, y, rw, rh = panel.region
recovered = float(band.plane[y:y + rh, x:x + rw].mean(dtype=np.float64))
print(f"panel region after calibration: {recovered:.6f} "
      f"(catalog {panel.rho}, relative error "
      f"{abs(recovered - panel.rho) / panel.rho:.2e})")
print(f"full frame reflectance range: "
      f"{band.plane.min():.4f}..{band.plane.max():.4f}")
