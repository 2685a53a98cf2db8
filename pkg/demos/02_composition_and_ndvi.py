"""
Channel composition and vegetation index
========================================

Multispectral captures carry narrowband planes (blue through NIR).
Downstream models want richer inputs: natural-color and false-color
composites plus the normalized difference vegetation index. This script
generates a synthetic field, builds the 12-channel stack used for
red-edge cameras, and inspects how NDVI separates plants from soil.
"""

import numpy as np

from weedmap import (
    REDEDGE12_CHANNELS,
    SEQUOIA8_CHANNELS,
    FieldConfig,
    build_stack,
    compose_false_color,
    compute_ndvi,
    generate_field,
)

# a small 8 x 6 m plot at 1 cm resolution keeps the run quick
config = FieldConfig(field_width_m=8.0, field_height_m=6.0, seed=7)
raster, labels = generate_field(config)
print(f"synthetic plot: {raster.width} x {raster.height} px, "
      f"bands {[b.name for b in raster.bands]}")

# NDVI contrasts near-infrared against red; healthy leaves reflect NIR
# strongly and absorb red, soil does neither
ndvi = compute_ndvi(raster.band("nir"), raster.band("red"))
veg = labels.labels > 0
print(f"\nNDVI on vegetation pixels: mean {ndvi.plane[veg].mean():+.3f}")
print(f"NDVI on soil pixels:       mean {ndvi.plane[~veg].mean():+.3f}")

# false-color composites are plain channel reorderings
rgb = compose_false_color(raster.bands, "rgb")
cir = compose_false_color(raster.bands, "cir")
print(f"\nrgb composite shape {rgb.shape}, cir composite shape {cir.shape}")
print("cir channel 0 is the NIR plane:",
      np.array_equal(cir[0], raster.band("nir").plane))

# the full stack bundles raw bands, composites, and NDVI in a fixed
# channel order so tiles stay self-describing
stack = build_stack(raster, "rededge12")
print(f"\nstack preset 'rededge12': {stack.data.shape[0]} channels")
for i, name in enumerate(stack.names):
    plane = stack.data[i]
    print(f"  [{i:2d}] {name:8s} range {plane.min():+.3f}..{plane.max():+.3f}")

assert stack.names == REDEDGE12_CHANNELS
print(f"\nfour-band cameras use the {len(SEQUOIA8_CHANNELS)}-channel "
      f"preset instead: {SEQUOIA8_CHANNELS}")

# single-band channels in the stack are views of the same numbers, not
# rescaled copies
print("stack 'red' equals source band:",
      np.array_equal(stack.plane("red"), raster.band("red").plane))
