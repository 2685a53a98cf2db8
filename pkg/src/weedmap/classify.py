"""Per-tile crop/weed classification.

The classifier interface is a single method turning a tile into
per-class probability planes (background, crop, weed). Any model can
plug in; the module ships a non-neural baseline so the full pipeline
runs without a training stage, plus an ingest path for predictions
produced elsewhere.

The baseline scores vegetation from NDVI and splits it into crop and
weed by distance to detected crop rows: sown fields have vegetation
organized in parallel rows, so green pixels far from every row line are
likely weeds. Rows are assumed vertical in tile coordinates (the
orthomosaics are rotated that way beforehand).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Protocol

import numpy as np

from .errors import (
    ClassifierFailureError,
    GridMismatchError,
    InvariantViolationError,
    MalformedPredictionError,
    MissingBandError,
    NoRowsFoundError,
    WeedMapError,
)
from .raster import PROB_SUM_EPS, read_probability_map
from .tiling import Tile, TilingPlan

PREDICTION_NAME_RE = re.compile(r"^r(\d+)_c(\d+)\.prob$")


def prediction_filename(grid_row: int, grid_col: int) -> str:
    return f"r{grid_row}_c{grid_col}.prob"


@dataclass
class TileProbabilities:
    """Per-class probability planes for one grid cell."""

    grid_row: int
    grid_col: int
    planes: np.ndarray  # (class_count, tile_h, tile_w) float32

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=np.float32)
        if self.planes.ndim != 3:
            raise InvariantViolationError(
                f"probability planes must be (C, h, w), got {self.planes.shape}"
            )

    @property
    def class_count(self) -> int:
        return self.planes.shape[0]


@dataclass(frozen=True)
class BaselineConfig:
    """Knobs of the NDVI + row-geometry baseline.

    Pixel defaults assume ~1 cm ground sampling with 0.5 m row spacing;
    ``row_band_px`` is the lateral half-width (std dev) of the crop band
    around each row line.
    """

    ndvi_threshold: float = 0.4
    steepness: float = 10.0
    row_spacing_px: float = 50.0
    row_band_px: float = 9.0

    def __post_init__(self):
        if not (-1.0 < self.ndvi_threshold < 1.0):
            raise InvariantViolationError("ndvi_threshold must lie in (-1, 1)")
        if self.steepness <= 0:
            raise InvariantViolationError("steepness must be > 0")
        if self.row_spacing_px <= 0:
            raise InvariantViolationError("row_spacing_px must be > 0")
        if self.row_band_px <= 0:
            raise InvariantViolationError("row_band_px must be > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "BaselineConfig":
        return cls(**{k: float(v) for k, v in d.items()})


def detect_rows(ndvi_plane: np.ndarray, config: BaselineConfig) -> list[float]:
    """Column offsets of crop row lines in a tile, in [0, width).

    Thresholds NDVI, projects the vegetation mask onto columns, and
    folds the projection at the known row period: the circular mean of
    column positions modulo the period gives the phase of the row comb.
    Raises NoRowsFoundError when no pixel passes the threshold.
    """
    ndvi_plane = np.asarray(ndvi_plane)
    if ndvi_plane.ndim != 2:
        raise InvariantViolationError(
            f"ndvi plane must be 2-D, got shape {ndvi_plane.shape}"
        )
    proj = (ndvi_plane > config.ndvi_threshold).sum(axis=0).astype(np.float64)
    if proj.sum() == 0:
        raise NoRowsFoundError("no vegetation above the NDVI threshold")
    period = config.row_spacing_px
    theta = 2.0 * math.pi * np.arange(proj.size) / period
    s = float(np.dot(proj, np.sin(theta)))
    c = float(np.dot(proj, np.cos(theta)))
    phase = (math.atan2(s, c) * period / (2.0 * math.pi)) % period
    width = ndvi_plane.shape[1]
    return [phase + k * period for k in range(math.ceil((width - phase) / period))]


def baseline_probabilities(
    tile: Tile, rows: list[float], config: BaselineConfig
) -> TileProbabilities:
    """Background/crop/weed probabilities from NDVI and row distances.

    P(veg) is a logistic in NDVI around the threshold; P(crop) decays
    with a Gaussian of the column distance to the nearest row line, and
    P(weed) is the remaining vegetation mass. With no rows given, all
    vegetation counts as weed.
    """
    if tile.channel_names is None or "ndvi" not in tile.channel_names:
        raise MissingBandError("ndvi")
    ndvi = tile.planes[tile.channel_names.index("ndvi")].astype(np.float64)
    p_veg = 1.0 / (1.0 + np.exp(-config.steepness * (ndvi - config.ndvi_threshold)))
    width = ndvi.shape[1]
    if rows:
        cols = np.arange(width, dtype=np.float64)
        dist = np.abs(cols[:, None] - np.asarray(rows, dtype=np.float64)).min(axis=1)
        crop_frac = np.exp(-(dist ** 2) / (2.0 * config.row_band_px ** 2))
    else:
        crop_frac = np.zeros(width)
    p_crop = p_veg * crop_frac[None, :]
    p_weed = p_veg - p_crop
    p_bg = 1.0 - p_veg
    planes = np.stack([p_bg, p_crop, p_weed], axis=0)
    planes /= planes.sum(axis=0, keepdims=True)
    return TileProbabilities(
        grid_row=tile.grid_row,
        grid_col=tile.grid_col,
        planes=planes.astype(np.float32),
    )


class TileClassifier(Protocol):
    """Anything that maps a tile to per-class probability planes."""

    def predict(self, tile: Tile) -> TileProbabilities: ...


class BaselineClassifier:
    """Training-free reference classifier (NDVI + row geometry).

    Stateless apart from its config, so one instance can serve many
    threads concurrently.
    """

    def __init__(self, config: BaselineConfig | None = None):
        self.config = config or BaselineConfig()

    def predict(self, tile: Tile) -> TileProbabilities:
        try:
            rows = detect_rows(
                tile.planes[tile.channel_names.index("ndvi")], self.config
            ) if tile.channel_names and "ndvi" in tile.channel_names else []
        except NoRowsFoundError:
            rows = []
        return baseline_probabilities(tile, rows, self.config)


def classify_tile(classifier: TileClassifier, tile: Tile) -> TileProbabilities:
    """Run a classifier on one tile and validate its output contract.

    The result must keep the tile's grid position and spatial size, with
    probabilities in [0, 1] summing to ~1 per pixel. Violations and any
    exception from the model surface as ClassifierFailureError.
    """
    try:
        pred = classifier.predict(tile)
    except WeedMapError as exc:
        raise ClassifierFailureError(
            f"tile ({tile.grid_row}, {tile.grid_col}): {exc}"
        ) from exc
    except Exception as exc:  # model code is foreign, wrap everything
        raise ClassifierFailureError(
            f"tile ({tile.grid_row}, {tile.grid_col}): "
            f"{type(exc).__name__}: {exc}"
        ) from exc
    if (pred.grid_row, pred.grid_col) != (tile.grid_row, tile.grid_col):
        raise ClassifierFailureError(
            f"prediction reports cell ({pred.grid_row}, {pred.grid_col}) "
            f"for tile ({tile.grid_row}, {tile.grid_col})"
        )
    if pred.planes.shape[1:] != tile.planes.shape[1:]:
        raise ClassifierFailureError(
            f"prediction shape {pred.planes.shape[1:]} does not match tile "
            f"{tile.planes.shape[1:]}"
        )
    if not np.isfinite(pred.planes).all():
        raise ClassifierFailureError("prediction has non-finite values")
    if pred.planes.min() < 0.0 or pred.planes.max() > 1.0:
        raise ClassifierFailureError("prediction values outside [0, 1]")
    total = pred.planes.sum(axis=0, dtype=np.float64)
    err = float(np.abs(total - 1.0).max())
    if err > PROB_SUM_EPS:
        raise ClassifierFailureError(
            f"per-pixel probabilities sum off by up to {err:g}"
        )
    return pred


def ingest_predictions(
    directory: str | Path, plan: TilingPlan
) -> list[TileProbabilities]:
    """Load external per-tile predictions named ``r<row>_c<col>.prob``.

    Files that do not match the naming pattern are ignored; matching
    files must parse as probability containers of the plan's exact tile
    size with grid indices inside the grid. Returns tiles sorted in
    row-major order.
    """
    directory = Path(directory)
    found: list[TileProbabilities] = []
    for path in sorted(directory.iterdir()):
        m = PREDICTION_NAME_RE.match(path.name)
        if not m:
            continue
        row, col = int(m.group(1)), int(m.group(2))
        if row >= plan.tiles_per_row or col >= plan.tiles_per_col:
            raise GridMismatchError(
                f"{path.name}: cell ({row}, {col}) outside grid "
                f"{plan.tiles_per_row}x{plan.tiles_per_col}"
            )
        try:
            pmap = read_probability_map(path)
        except WeedMapError as exc:
            raise MalformedPredictionError(f"{path.name}: {exc}") from exc
        if pmap.height != plan.tile_height or pmap.width != plan.tile_width:
            raise GridMismatchError(
                f"{path.name}: tile is {pmap.width}x{pmap.height}, plan "
                f"expects {plan.tile_width}x{plan.tile_height}"
            )
        found.append(
            TileProbabilities(grid_row=row, grid_col=col, planes=pmap.planes)
        )
    found.sort(key=lambda t: (t.grid_row, t.grid_col))
    return found


def classify_tiles(
    classifier: TileClassifier,
    tiles: Iterable[Tile],
    skip_ineffective: bool = True,
) -> Iterator[TileProbabilities]:
    """Classify a tile sequence, skipping padding-only tiles by default.

    Skipped cells simply produce no prediction; reassembly fills them
    with background.
    """
    for tile in tiles:
        if skip_ineffective and not tile.effective:
            continue
        yield classify_tile(classifier, tile)
