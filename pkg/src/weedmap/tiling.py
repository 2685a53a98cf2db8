"""Orthomosaic tiling: grid planning, tile extraction, map reassembly.

Large maps are cut into fixed-size tiles (default 480x360 px, w x h) in
row-major order. The map is conceptually padded with zeros on the right
and bottom edges so every tile has full size; the plan records exactly
how much padding that adds so reassembly can undo it. Grid cells that
contain only padding are marked not effective and may be skipped
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .compose import ChannelStack
from .errors import (
    DimensionMismatchError,
    DuplicateGridCellError,
    OutOfRangeIndexError,
    ZeroDimensionError,
)
from .raster import ProbabilityMap

DEFAULT_TILE_WIDTH = 480
DEFAULT_TILE_HEIGHT = 360


@dataclass(frozen=True)
class TilingPlan:
    """Grid geometry for one map; all bookkeeping is derived from it."""

    map_width: int
    map_height: int
    tile_width: int = DEFAULT_TILE_WIDTH
    tile_height: int = DEFAULT_TILE_HEIGHT

    def __post_init__(self):
        for label, v in (
            ("map_width", self.map_width),
            ("map_height", self.map_height),
            ("tile_width", self.tile_width),
            ("tile_height", self.tile_height),
        ):
            if int(v) != v or v <= 0:
                raise ZeroDimensionError(f"{label} must be a positive integer, got {v}")

    @property
    def tiles_per_row(self) -> int:
        """Number of tile rows (vertical count)."""
        return math.ceil(self.map_height / self.tile_height)

    @property
    def tiles_per_col(self) -> int:
        """Number of tile columns (horizontal count)."""
        return math.ceil(self.map_width / self.tile_width)

    @property
    def pad_rows(self) -> int:
        """Zero rows appended at the bottom edge."""
        return self.tiles_per_row * self.tile_height - self.map_height

    @property
    def pad_cols(self) -> int:
        """Zero columns appended at the right edge."""
        return self.tiles_per_col * self.tile_width - self.map_width

    @property
    def padded_width(self) -> int:
        return self.map_width + self.pad_cols

    @property
    def padded_height(self) -> int:
        return self.map_height + self.pad_rows

    @property
    def tile_count(self) -> int:
        return self.tiles_per_row * self.tiles_per_col

    def cell_rect(self, row: int, col: int) -> tuple[int, int, int, int]:
        """(x0, y0, w_eff, h_eff) of a cell's overlap with the real map."""
        if not (0 <= row < self.tiles_per_row and 0 <= col < self.tiles_per_col):
            raise OutOfRangeIndexError(
                f"cell ({row}, {col}) outside grid "
                f"{self.tiles_per_row}x{self.tiles_per_col}"
            )
        x0 = col * self.tile_width
        y0 = row * self.tile_height
        return (
            x0,
            y0,
            min(self.tile_width, self.map_width - x0),
            min(self.tile_height, self.map_height - y0),
        )

    def cells(self) -> Iterator[tuple[int, int]]:
        """Row-major (row, col) traversal of the grid."""
        for row in range(self.tiles_per_row):
            for col in range(self.tiles_per_col):
                yield row, col

    def to_dict(self) -> dict:
        return {
            "map_width": self.map_width,
            "map_height": self.map_height,
            "tile_width": self.tile_width,
            "tile_height": self.tile_height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TilingPlan":
        return cls(
            map_width=int(d["map_width"]),
            map_height=int(d["map_height"]),
            tile_width=int(d["tile_width"]),
            tile_height=int(d["tile_height"]),
        )


def plan_tiling(
    map_width: int,
    map_height: int,
    tile_width: int = DEFAULT_TILE_WIDTH,
    tile_height: int = DEFAULT_TILE_HEIGHT,
) -> TilingPlan:
    """Plan the tile grid for a map of the given pixel size."""
    return TilingPlan(
        map_width=map_width,
        map_height=map_height,
        tile_width=tile_width,
        tile_height=tile_height,
    )


@dataclass
class Tile:
    """One padded tile cut from a channel stack."""

    grid_row: int
    grid_col: int
    planes: np.ndarray  # (C, tile_h, tile_w) float32
    channel_names: tuple[str, ...] | None = None
    effective: bool = True

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=np.float32)
        if self.planes.ndim != 3:
            raise DimensionMismatchError(
                f"tile planes must be (C, h, w), got shape {self.planes.shape}"
            )


def extract_tiles(stack: ChannelStack, plan: TilingPlan) -> Iterator[Tile]:
    """Yield tiles of ``stack`` in row-major order (lazily, one at a time).

    Tiles on the right/bottom edges are zero-padded to full tile size.
    A tile is effective when any of its values is > 0.
    """
    if stack.height != plan.map_height or stack.width != plan.map_width:
        raise DimensionMismatchError(
            f"stack is {stack.width}x{stack.height}, plan expects "
            f"{plan.map_width}x{plan.map_height}"
        )
    c = stack.channel_count
    for row, col in plan.cells():
        x0, y0, w_eff, h_eff = plan.cell_rect(row, col)
        planes = np.zeros((c, plan.tile_height, plan.tile_width), dtype=np.float32)
        planes[:, :h_eff, :w_eff] = stack.data[:, y0 : y0 + h_eff, x0 : x0 + w_eff]
        yield Tile(
            grid_row=row,
            grid_col=col,
            planes=planes,
            channel_names=stack.names,
            effective=bool(np.any(planes > 0)),
        )


def assemble(
    plan: TilingPlan,
    tiles: Iterable,
    class_count: int = 3,
) -> ProbabilityMap:
    """Reassemble per-tile probability planes into one map-sized stack.

    ``tiles`` is anything with ``grid_row``, ``grid_col`` and a
    (class_count, tile_h, tile_w) ``planes`` array; padding portions are
    discarded. Cells no tile covers stay at probability 1 for class 0
    (background). Duplicate cells and out-of-grid indices are rejected.
    """
    if class_count <= 0:
        raise ZeroDimensionError(f"class_count must be > 0, got {class_count}")
    out = np.zeros((class_count, plan.map_height, plan.map_width), dtype=np.float32)
    out[0] = 1.0
    seen: set[tuple[int, int]] = set()
    for tile in tiles:
        row, col = tile.grid_row, tile.grid_col
        x0, y0, w_eff, h_eff = plan.cell_rect(row, col)  # validates indices
        if (row, col) in seen:
            raise DuplicateGridCellError(f"cell ({row}, {col}) supplied twice")
        seen.add((row, col))
        planes = np.asarray(tile.planes, dtype=np.float32)
        if planes.shape != (class_count, plan.tile_height, plan.tile_width):
            raise DimensionMismatchError(
                f"tile ({row}, {col}) has shape {planes.shape}, expected "
                f"({class_count}, {plan.tile_height}, {plan.tile_width})"
            )
        out[:, y0 : y0 + h_eff, x0 : x0 + w_eff] = planes[:, :h_eff, :w_eff]
    return ProbabilityMap(out)
