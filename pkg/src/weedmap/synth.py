"""Synthetic row-crop fields with known ground truth.

Generates a five-band reflectance raster plus a pixel label map for a
rectangular field: crop disks sit on a regular grid of vertical row
lines, weeds are scattered uniformly but rejected if they would overlap
a crop disk, and every disk gets a ~2 px soft edge so band values blend
into the soil background. Per-band Gaussian noise is added last. All
randomness comes from one seeded generator, so equal configs give
byte-identical outputs.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalidError
from .raster import (
    Band,
    BandEntry,
    DatasetManifest,
    LabelMap,
    MultispectralRaster,
    quantize_unit,
    save_labelmap,
    save_plane,
    write_manifest,
)

BAND_ORDER = ("blue", "green", "red", "red_edge", "nir")

# nominal band centers/widths of a five-band narrowband camera
BAND_METADATA = {
    "blue": (475.0, 20.0),
    "green": (560.0, 20.0),
    "red": (668.0, 10.0),
    "red_edge": (717.0, 10.0),
    "nir": (840.0, 40.0),
}

DEFAULT_PROFILES = {
    "soil": {"blue": 0.08, "green": 0.12, "red": 0.20, "red_edge": 0.22, "nir": 0.25},
    "crop": {"blue": 0.04, "green": 0.12, "red": 0.10, "red_edge": 0.45, "nir": 0.80},
    "weed": {"blue": 0.05, "green": 0.14, "red": 0.12, "red_edge": 0.35, "nir": 0.75},
}


@dataclass
class FieldConfig:
    """Geometry, materials and noise of one synthetic field."""

    field_width_m: float = 20.0
    field_height_m: float = 20.0
    gsd_cm: float = 1.0
    row_spacing_m: float = 0.5
    intra_row_m: float = 0.18
    crop_radius_m: float = 0.09
    weed_radius_m: float = 0.07
    weed_density_per_m2: float = 4.0
    edge_px: float = 2.0  # soft-edge full width, in pixels
    noise_sigma: float = 0.01
    seed: int = 0
    profiles: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_PROFILES))

    def __post_init__(self):
        positive = {
            "field_width_m": self.field_width_m,
            "field_height_m": self.field_height_m,
            "gsd_cm": self.gsd_cm,
            "row_spacing_m": self.row_spacing_m,
            "intra_row_m": self.intra_row_m,
            "crop_radius_m": self.crop_radius_m,
            "weed_radius_m": self.weed_radius_m,
            "edge_px": self.edge_px,
        }
        for label, v in positive.items():
            if v <= 0:
                raise ConfigInvalidError(f"{label} must be > 0, got {v}")
        if self.weed_density_per_m2 < 0:
            raise ConfigInvalidError("weed_density_per_m2 must be >= 0")
        if self.noise_sigma < 0:
            raise ConfigInvalidError("noise_sigma must be >= 0")
        for material in ("soil", "crop", "weed"):
            profile = self.profiles.get(material)
            if profile is None:
                raise ConfigInvalidError(f"missing material profile {material!r}")
            for band in BAND_ORDER:
                value = profile.get(band)
                if value is None or not (0.0 <= value <= 1.0):
                    raise ConfigInvalidError(
                        f"profile {material!r} needs {band!r} in [0, 1]"
                    )

    @property
    def width_px(self) -> int:
        return int(round(self.field_width_m * 100.0 / self.gsd_cm))

    @property
    def height_px(self) -> int:
        return int(round(self.field_height_m * 100.0 / self.gsd_cm))

    def px(self, meters: float) -> float:
        return meters * 100.0 / self.gsd_cm

    def row_offsets_px(self) -> list[float]:
        """True column positions of the row lines."""
        spacing = self.px(self.row_spacing_m)
        xs = []
        x = spacing / 2.0
        while x < self.width_px:
            xs.append(x)
            x += spacing
        return xs

    @classmethod
    def from_dict(cls, d: dict) -> "FieldConfig":
        return cls(**d)


def _plant_centers_y(config: FieldConfig) -> list[float]:
    intra = config.px(config.intra_row_m)
    ys = []
    y = intra / 2.0
    while y < config.height_px:
        ys.append(y)
        y += intra
    return ys


def _soft_disk(alpha: np.ndarray, x: float, y: float, radius: float, edge: float):
    """Accumulate (by max) one disk with a linear soft edge into alpha."""
    h, w = alpha.shape
    reach = radius + edge / 2.0 + 1.0
    i0 = max(int(np.floor(y - reach)), 0)
    i1 = min(int(np.ceil(y + reach)) + 1, h)
    j0 = max(int(np.floor(x - reach)), 0)
    j1 = min(int(np.ceil(x + reach)) + 1, w)
    if i0 >= i1 or j0 >= j1:
        return
    ii = np.arange(i0, i1, dtype=np.float64)[:, None] - y
    jj = np.arange(j0, j1, dtype=np.float64)[None, :] - x
    d = np.hypot(ii, jj)
    a = np.clip(0.5 + (radius - d) / edge, 0.0, 1.0)
    np.maximum(alpha[i0:i1, j0:j1], a, out=alpha[i0:i1, j0:j1])


def _sample_weeds(
    config: FieldConfig, rng: np.random.Generator,
    rows_x: np.ndarray, plants_y: np.ndarray,
) -> list[tuple[float, float]]:
    """Uniform weed centers, rejecting overlap with any crop disk."""
    target = int(round(
        config.weed_density_per_m2 * config.field_width_m * config.field_height_m
    ))
    min_dist = config.px(config.crop_radius_m) + config.px(config.weed_radius_m)
    accepted: list[tuple[float, float]] = []
    attempts = 0
    limit = max(50 * target, 1000)
    while len(accepted) < target and attempts < limit:
        attempts += 1
        x = float(rng.uniform(0.0, config.width_px))
        y = float(rng.uniform(0.0, config.height_px))
        # crop centers form a full grid, so the nearest one factors into
        # the nearest row line and the nearest plant position
        dx = np.abs(rows_x - x).min() if rows_x.size else np.inf
        dy = np.abs(plants_y - y).min() if plants_y.size else np.inf
        if dx * dx + dy * dy < min_dist * min_dist:
            continue
        accepted.append((x, y))
    return accepted


def generate_field(config: FieldConfig) -> tuple[MultispectralRaster, LabelMap]:
    """Render one field; returns the band raster and its label map."""
    h, w = config.height_px, config.width_px
    if h <= 0 or w <= 0:
        raise ConfigInvalidError("field dimensions collapse to zero pixels")
    rng = np.random.default_rng(config.seed)
    rows_x = np.asarray(config.row_offsets_px(), dtype=np.float64)
    plants_y = np.asarray(_plant_centers_y(config), dtype=np.float64)
    crop_r = config.px(config.crop_radius_m)
    weed_r = config.px(config.weed_radius_m)

    # crop cover: the plant grid is separable, so the distance to the
    # nearest center splits into per-column and per-row parts
    alpha_crop = np.zeros((h, w), dtype=np.float64)
    if rows_x.size and plants_y.size:
        dx = np.abs(np.arange(w, dtype=np.float64)[:, None] - rows_x).min(axis=1)
        dy = np.abs(np.arange(h, dtype=np.float64)[:, None] - plants_y).min(axis=1)
        d = np.hypot(dy[:, None], dx[None, :])
        alpha_crop = np.clip(0.5 + (crop_r - d) / config.edge_px, 0.0, 1.0)

    weeds = _sample_weeds(config, rng, rows_x, plants_y)
    alpha_weed = np.zeros((h, w), dtype=np.float64)
    for x, y in weeds:
        _soft_disk(alpha_weed, x, y, weed_r, config.edge_px)

    labels = np.zeros((h, w), dtype=np.int64)
    labels[alpha_weed >= 0.5] = 2
    labels[alpha_crop >= 0.5] = 1  # tangency goes to crop

    soil = config.profiles["soil"]
    crop = config.profiles["crop"]
    weed = config.profiles["weed"]
    bands = []
    for name in BAND_ORDER:
        base = soil[name]
        plane = (
            base
            + alpha_crop * (crop[name] - base)
            + alpha_weed * (weed[name] - base)
        )
        if config.noise_sigma > 0:
            plane = plane + rng.normal(0.0, config.noise_sigma, size=plane.shape)
        np.clip(plane, 0.0, 1.0, out=plane)
        center, width = BAND_METADATA[name]
        bands.append(Band(
            name=name,
            center_nm=center,
            bandwidth_nm=width,
            plane=plane.astype(np.float32),
        ))
    raster = MultispectralRaster(
        bands=bands, gsd_cm=config.gsd_cm, name=f"synthetic_{config.seed}"
    )
    return raster, LabelMap(labels=labels, class_count=3)


def save_field(
    raster: MultispectralRaster,
    labels: LabelMap,
    out_dir: str | Path,
    tile_width: int = 480,
    tile_height: int = 360,
    config: FieldConfig | None = None,
) -> Path:
    """Write a field as 16-bit band PNGs, a label PNG and a manifest.

    Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for band in raster.bands:
        filename = f"band_{band.name}.png"
        save_plane(out_dir / filename, quantize_unit(band.plane, 65535), 65535)
        entries.append(BandEntry(
            name=band.name,
            center_nm=band.center_nm,
            bandwidth_nm=band.bandwidth_nm,
            path=filename,
        ))
    save_labelmap(labels, out_dir / "labels.png")
    manifest = DatasetManifest(
        camera="RedEdgeM",
        gsd_cm=raster.gsd_cm,
        tile_width=tile_width,
        tile_height=tile_height,
        bands=entries,
        labels="labels.png",
    )
    path = out_dir / "manifest.json"
    write_manifest(manifest, path)
    if config is not None:
        with open(out_dir / "field_config.json", "w") as fh:
            json.dump(
                {
                    "field_width_m": config.field_width_m,
                    "field_height_m": config.field_height_m,
                    "gsd_cm": config.gsd_cm,
                    "row_spacing_m": config.row_spacing_m,
                    "intra_row_m": config.intra_row_m,
                    "crop_radius_m": config.crop_radius_m,
                    "weed_radius_m": config.weed_radius_m,
                    "weed_density_per_m2": config.weed_density_per_m2,
                    "edge_px": config.edge_px,
                    "noise_sigma": config.noise_sigma,
                    "seed": config.seed,
                },
                fh,
                indent=2,
            )
    return path
