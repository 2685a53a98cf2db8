"""Channel composition: false-color composites, NDVI, and input stacks.

A classifier input stack is an ordered set of named 2-D planes built
from the calibrated bands of one camera. Two presets are supported:

* ``rededge12``: red, red_edge, green, blue, rgb.r, rgb.g, rgb.b,
  cir.nir, cir.r, cir.g, ndvi, nir (12 channels)
* ``sequoia8``: red, red_edge, green, cir.nir, cir.r, cir.g, ndvi, nir
  (8 channels; the camera has no blue band)

RGB is (red, green, blue); CIR is (nir, red, green). Single-band
channels reuse the source plane values unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvariantViolationError, MissingBandError
from .raster import Band, MultispectralRaster

NDVI_SUM_MIN = 1e-9

PRESET_REDEDGE12 = "rededge12"
PRESET_SEQUOIA8 = "sequoia8"
PRESET_CUSTOM = "custom"

REDEDGE12_CHANNELS = (
    "red", "red_edge", "green", "blue",
    "rgb.r", "rgb.g", "rgb.b",
    "cir.nir", "cir.r", "cir.g",
    "ndvi", "nir",
)
SEQUOIA8_CHANNELS = (
    "red", "red_edge", "green",
    "cir.nir", "cir.r", "cir.g",
    "ndvi", "nir",
)

_PRESET_CHANNELS = {
    PRESET_REDEDGE12: REDEDGE12_CHANNELS,
    PRESET_SEQUOIA8: SEQUOIA8_CHANNELS,
}


def compute_ndvi(nir: Band, red: Band) -> Band:
    """NDVI = (NIR - R) / (NIR + R), with 0 where NIR + R is ~0."""
    if nir.plane.shape != red.plane.shape:
        raise DimensionMismatchError(
            f"nir is {nir.plane.shape}, red is {red.plane.shape}"
        )
    num = nir.plane - red.plane
    den = nir.plane + red.plane
    safe = np.abs(den) >= NDVI_SUM_MIN
    out = np.zeros_like(den)
    np.divide(num, den, out=out, where=safe)
    np.clip(out, -1.0, 1.0, out=out)
    return Band(name="ndvi", center_nm=0.0, bandwidth_nm=0.0, plane=out)


def compose_false_color(bands: list[Band], kind: str) -> np.ndarray:
    """Stack three bands into a (3, H, W) composite.

    ``kind`` is ``"rgb"`` (red, green, blue) or ``"cir"`` (nir, red,
    green). Bands are picked from ``bands`` by canonical name.
    """
    order = {"rgb": ("red", "green", "blue"), "cir": ("nir", "red", "green")}
    if kind not in order:
        raise InvariantViolationError(f"unknown composite kind {kind!r}")
    by_name = {b.name: b for b in bands}
    picked = []
    for name in order[kind]:
        if name not in by_name:
            raise MissingBandError(name)
        picked.append(by_name[name])
    shape = picked[0].plane.shape
    for b in picked[1:]:
        if b.plane.shape != shape:
            raise DimensionMismatchError(
                f"band {b.name!r} is {b.plane.shape}, expected {shape}"
            )
    return np.stack([b.plane for b in picked], axis=0)


@dataclass
class ChannelStack:
    """Ordered named channel planes as one (C, H, W) float32 array."""

    names: tuple[str, ...]
    data: np.ndarray
    preset: str = PRESET_CUSTOM

    def __post_init__(self):
        self.names = tuple(self.names)
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 3:
            raise DimensionMismatchError(
                f"stack data must be (C, H, W), got shape {self.data.shape}"
            )
        if len(self.names) != self.data.shape[0]:
            raise InvariantViolationError(
                f"{len(self.names)} names for {self.data.shape[0]} planes"
            )
        if len(set(self.names)) != len(self.names):
            raise InvariantViolationError("duplicate channel names")
        expected = _PRESET_CHANNELS.get(self.preset)
        if expected is not None and self.names != expected:
            raise InvariantViolationError(
                f"preset {self.preset!r} requires channels {expected}, "
                f"got {self.names}"
            )

    @property
    def channel_count(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def plane(self, name: str) -> np.ndarray:
        try:
            return self.data[self.names.index(name)]
        except ValueError:
            raise MissingBandError(name) from None


def build_stack(raster: MultispectralRaster, preset: str) -> ChannelStack:
    """Compose the classifier input stack for a preset from raw bands.

    Requires the canonical bands of the preset's camera; raises
    MissingBandError otherwise.
    """
    if preset not in _PRESET_CHANNELS:
        raise InvariantViolationError(f"unknown stack preset {preset!r}")
    red = raster.band("red")
    green = raster.band("green")
    red_edge = raster.band("red_edge")
    nir = raster.band("nir")
    ndvi = compute_ndvi(nir, red)
    if preset == PRESET_REDEDGE12:
        blue = raster.band("blue")
        planes = [
            red.plane, red_edge.plane, green.plane, blue.plane,
            red.plane, green.plane, blue.plane,        # rgb composite
            nir.plane, red.plane, green.plane,         # cir composite
            ndvi.plane, nir.plane,
        ]
    else:
        planes = [
            red.plane, red_edge.plane, green.plane,
            nir.plane, red.plane, green.plane,         # cir composite
            ndvi.plane, nir.plane,
        ]
    return ChannelStack(
        names=_PRESET_CHANNELS[preset],
        data=np.stack(planes, axis=0),
        preset=preset,
    )
