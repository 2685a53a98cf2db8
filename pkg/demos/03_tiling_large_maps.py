"""
Tiling orthomosaics with exact padding bookkeeping
==================================================

Field orthomosaics run to tens of megapixels, far past what a per-tile
classifier accepts, so maps are cut into a fixed grid of 480 x 360 px
tiles. Edge tiles are zero-padded to full size and the plan records how
much, which lets reassembly crop the padding back out and reproduce the
original dimensions exactly.
"""

import numpy as np

from weedmap import ChannelStack, TilingPlan, assemble, extract_tiles, plan_tiling

# typical orthomosaic sizes from multi-hectare sorghum surveys
survey_sizes = [
    (5995, 5854), (4867, 5574), (6403, 6405), (5470, 5995),
    (4319, 4506), (7221, 5909), (5601, 5027), (6074, 6889),
]

print(f"{'map (w x h)':>14s} {'grid':>8s} {'tiles':>6s} {'pad rows':>9s} "
      f"{'pad cols':>9s}")
for w, h in survey_sizes:
    plan = plan_tiling(w, h)
    print(f"{w:>6d} x {h:<5d} {plan.tiles_per_row:>3d} x {plan.tiles_per_col:<3d}"
          f" {plan.tile_count:>6d} {plan.pad_rows:>9d} {plan.pad_cols:>9d}")

# walk one small plan end to end
plan = TilingPlan(map_width=1000, map_height=700)
print(f"\n1000 x 700 map: grid {plan.tiles_per_row} x {plan.tiles_per_col}, "
      f"padded to {plan.padded_width} x {plan.padded_height}")

# cell_rect reports the unpadded extent of each grid cell; interior
# cells are full-size, the last row and column are clipped
for row, col in [(0, 0), (1, 2), (1, 0)]:
    x0, y0, w_eff, h_eff = plan.cell_rect(row, col)
    print(f"  cell ({row},{col}): origin ({x0},{y0}), "
          f"effective {w_eff} x {h_eff}")

# extraction is a generator, so only one tile is in memory at a time;
# tiles whose effective region is empty are flagged
rng = np.random.default_rng(3)
stack = ChannelStack(names=("a", "b", "c"),
                     data=rng.random((3, 700, 1000), dtype=np.float32))
tiles = list(extract_tiles(stack, plan))
print(f"\nextracted {len(tiles)} tiles "
      f"({sum(t.effective for t in tiles)} effective)")
print(f"tile planes shape: {tiles[0].planes.shape}")

# a bottom-edge tile carries zeros below the real data
edge = tiles[-1]
print(f"last tile ({edge.grid_row},{edge.grid_col}) pad region is zero:",
      bool(np.all(edge.planes[:, -plan.pad_rows:, :] == 0)))

# reassembly inverts extraction exactly: feeding the tiles straight
# back reproduces the source planes bit for bit
pmap = assemble(plan, iter(tiles), class_count=3)
print(f"\nassembled map: {pmap.planes.shape} "
      f"(matches source {stack.data.shape[2]} x {stack.data.shape[1]})")
print("round trip identical:", np.array_equal(pmap.planes, stack.data))
