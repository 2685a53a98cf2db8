"""Data model and IO for aligned multispectral rasters.

Covers the on-disk surfaces of the pipeline: dataset manifests (JSON),
single-channel band planes (8/16-bit PNG or binary PGM), label maps, and
the float32 probability-map container.

All planes are stored row-major with dtype float32 once loaded; integer
sources are scaled to [0, 1] by dividing by the container maximum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeError,
    DimensionMismatchError,
    EmptyBandListError,
    InvariantViolationError,
    MissingBandError,
    MissingFileError,
    SchemaViolationError,
)

CLASS_COUNT = 3
CLASS_NAMES = ("bg", "crop", "weed")
CAMERAS = ("RedEdgeM", "Sequoia", "Custom")

# 16-byte container magic for float probability maps
PROB_MAGIC = b"WMAPPROB" + b"\x00" * 8

# normalization tolerance for per-pixel probability sums
PROB_SUM_EPS = 1e-4


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class Band:
    """A single spectral plane with its filter metadata.

    The plane is a 2-D float32 array of reflectance values; after
    calibration values are expected to lie in [0, 1] (clamped at 1.5 for
    specular pixels). All values must be finite.
    """

    name: str
    center_nm: float
    bandwidth_nm: float
    plane: np.ndarray

    def __post_init__(self):
        self.plane = np.asarray(self.plane, dtype=np.float32)
        if self.plane.ndim != 2:
            raise InvariantViolationError(
                f"band '{self.name}': plane must be 2-D, got shape {self.plane.shape}"
            )
        if not np.isfinite(self.plane).all():
            raise InvariantViolationError(
                f"band '{self.name}': plane contains NaN or Inf"
            )

    @property
    def width(self) -> int:
        return self.plane.shape[1]

    @property
    def height(self) -> int:
        return self.plane.shape[0]


@dataclass
class MultispectralRaster:
    """An aligned, ordered collection of bands sharing one pixel grid."""

    bands: list[Band]
    gsd_cm: float
    name: str = ""

    def __post_init__(self):
        if not self.bands:
            raise InvariantViolationError("raster has no bands")
        w, h = self.bands[0].width, self.bands[0].height
        for b in self.bands:
            if (b.width, b.height) != (w, h):
                raise DimensionMismatchError(
                    f"band '{b.name}' is {b.width}x{b.height}, expected {w}x{h}"
                )
        names = [b.name for b in self.bands]
        if len(set(names)) != len(names):
            raise InvariantViolationError(f"duplicate band names: {names}")

    @property
    def width(self) -> int:
        return self.bands[0].width

    @property
    def height(self) -> int:
        return self.bands[0].height

    def band(self, name: str) -> Band:
        for b in self.bands:
            if b.name == name:
                return b
        raise MissingBandError(name)

    def has_band(self, name: str) -> bool:
        return any(b.name == name for b in self.bands)


@dataclass
class LabelMap:
    """Per-pixel class ids: 0 = bg, 1 = crop, 2 = weed."""

    labels: np.ndarray
    class_count: int = CLASS_COUNT

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise InvariantViolationError(
                f"label map must be 2-D, got shape {self.labels.shape}"
            )
        if not np.issubdtype(self.labels.dtype, np.integer):
            raise InvariantViolationError(
                f"label map must be integer-typed, got {self.labels.dtype}"
            )
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.class_count
        ):
            raise InvariantViolationError(
                f"label values must lie in [0, {self.class_count - 1}]"
            )

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass
class ProbabilityMap:
    """Per-class probability planes, stacked as a (C, H, W) float32 array."""

    planes: np.ndarray

    def __post_init__(self):
        self.planes = np.asarray(self.planes, dtype=np.float32)
        if self.planes.ndim != 3:
            raise InvariantViolationError(
                f"probability planes must be (C, H, W), got shape {self.planes.shape}"
            )

    @property
    def class_count(self) -> int:
        return self.planes.shape[0]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    def validate_range(self):
        """Raise unless every value lies in [0, 1] (NaN rejected)."""
        lo = float(self.planes.min(initial=0.0))
        hi = float(self.planes.max(initial=0.0))
        if not (lo >= 0.0 and hi <= 1.0) or not np.isfinite(self.planes).all():
            raise InvariantViolationError(
                f"probability values outside [0, 1]: min={lo}, max={hi}"
            )


@dataclass
class BandEntry:
    """One band declaration inside a dataset manifest."""

    name: str
    center_nm: float
    bandwidth_nm: float
    path: str


@dataclass
class CalibrationBlock:
    """Raw calibration numbers as declared in a manifest.

    Converted into physics-side parameter objects by the calibration
    module; this type only carries the schema.
    """

    a1: float
    a2: float
    a3: float
    exposure_s: float
    gain: float
    black_level: float
    bit_depth: int
    vignette_ci: float
    vignette_cj: float
    vignette_q: tuple[float, ...]
    panel_rho: tuple[float, ...]
    panel_region: tuple[int, int, int, int]  # x, y, w, h
    panel_image: str


@dataclass
class DatasetManifest:
    """Declarative description of one dataset on disk."""

    camera: str
    gsd_cm: float
    tile_width: int
    tile_height: int
    bands: list[BandEntry]
    calibration: CalibrationBlock | None = None
    labels: str | None = None
    base_dir: Path | None = field(default=None, compare=False)

    def resolve(self, rel: str) -> Path:
        """Resolve a manifest-relative file path."""
        p = Path(rel)
        if p.is_absolute() or self.base_dir is None:
            return p
        return self.base_dir / p


# ---------------------------------------------------------------------------
# Manifest IO
# ---------------------------------------------------------------------------

def _req(obj: dict, key: str, kind, where: str):
    """Fetch a typed required field, reporting its dotted path on failure."""
    path = f"{where}.{key}" if where else key
    if key not in obj:
        raise SchemaViolationError(path, "missing")
    val = obj[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise SchemaViolationError(path, f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise SchemaViolationError(path, f"expected an integer, got {val!r}")
        return val
    if kind is str:
        if not isinstance(val, str):
            raise SchemaViolationError(path, f"expected a string, got {val!r}")
        return val
    if kind is dict:
        if not isinstance(val, dict):
            raise SchemaViolationError(path, f"expected an object, got {val!r}")
        return val
    if kind is list:
        if not isinstance(val, list):
            raise SchemaViolationError(path, f"expected a list, got {val!r}")
        return val
    raise TypeError(f"unsupported kind {kind}")


def _parse_calibration(block: dict, n_bands: int) -> CalibrationBlock:
    where = "calibration"
    exposure_s = _req(block, "exposure_s", float, where)
    gain = _req(block, "gain", float, where)
    black = _req(block, "black_level", float, where)
    bits = _req(block, "bit_depth", int, where)
    if exposure_s <= 0:
        raise SchemaViolationError("calibration.exposure_s", "must be > 0")
    if gain <= 0:
        raise SchemaViolationError("calibration.gain", "must be > 0")
    if not (0.0 <= black < 1.0):
        raise SchemaViolationError("calibration.black_level", "must lie in [0, 1)")
    if bits not in (8, 10, 12, 16):
        raise SchemaViolationError("calibration.bit_depth", "must be 8, 10, 12, or 16")

    vig = _req(block, "vignette", dict, where)
    q = _req(vig, "q", list, "calibration.vignette")
    if len(q) != 6 or not all(isinstance(v, (int, float)) for v in q):
        raise SchemaViolationError("calibration.vignette.q", "expected 6 numbers")

    panel = _req(block, "panel", dict, where)
    rho = _req(panel, "rho_per_band", list, "calibration.panel")
    if len(rho) != n_bands:
        raise SchemaViolationError(
            "calibration.panel.rho_per_band",
            f"expected {n_bands} entries (one per band), got {len(rho)}",
        )
    if not all(isinstance(v, (int, float)) and 0.0 < v <= 1.0 for v in rho):
        raise SchemaViolationError(
            "calibration.panel.rho_per_band", "values must lie in (0, 1]"
        )
    region = _req(panel, "region", list, "calibration.panel")
    if len(region) != 4 or not all(isinstance(v, int) for v in region):
        raise SchemaViolationError(
            "calibration.panel.region", "expected [x, y, w, h] integers"
        )
    if region[2] <= 0 or region[3] <= 0:
        raise SchemaViolationError("calibration.panel.region", "region is empty")

    return CalibrationBlock(
        a1=_req(block, "a1", float, where),
        a2=_req(block, "a2", float, where),
        a3=_req(block, "a3", float, where),
        exposure_s=exposure_s,
        gain=gain,
        black_level=black,
        bit_depth=bits,
        vignette_ci=_req(vig, "ci", float, "calibration.vignette"),
        vignette_cj=_req(vig, "cj", float, "calibration.vignette"),
        vignette_q=tuple(float(v) for v in q),
        panel_rho=tuple(float(v) for v in rho),
        panel_region=tuple(region),
        panel_image=_req(panel, "image_path", str, "calibration.panel"),
    )


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest from JSON."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaViolationError("json", str(e)) from e
    if not isinstance(doc, dict):
        raise SchemaViolationError("json", "top-level value must be an object")

    camera = _req(doc, "camera", str, "")
    if camera not in CAMERAS:
        raise SchemaViolationError("camera", f"must be one of {CAMERAS}")
    gsd_cm = _req(doc, "gsd_cm", float, "")
    if gsd_cm <= 0:
        raise SchemaViolationError("gsd_cm", "must be > 0")

    tile = _req(doc, "tile", dict, "")
    tile_w = _req(tile, "w", int, "tile")
    tile_h = _req(tile, "h", int, "tile")
    if tile_w <= 0 or tile_h <= 0:
        raise SchemaViolationError("tile", "tile dimensions must be positive")

    raw_bands = _req(doc, "bands", list, "")
    if not raw_bands:
        raise EmptyBandListError()
    bands = []
    for i, rb in enumerate(raw_bands):
        where = f"bands[{i}]"
        if not isinstance(rb, dict):
            raise SchemaViolationError(where, "expected an object")
        bands.append(
            BandEntry(
                name=_req(rb, "name", str, where),
                center_nm=_req(rb, "center_nm", float, where),
                bandwidth_nm=_req(rb, "bandwidth_nm", float, where),
                path=_req(rb, "path", str, where),
            )
        )
    paths = [b.path for b in bands]
    if len(set(paths)) != len(paths):
        raise SchemaViolationError("bands", "band file paths must be distinct")

    calibration = None
    if "calibration" in doc and doc["calibration"] is not None:
        calibration = _parse_calibration(
            _req(doc, "calibration", dict, ""), len(bands)
        )

    labels = None
    if "labels" in doc and doc["labels"] is not None:
        labels = _req(doc, "labels", str, "")

    return DatasetManifest(
        camera=camera,
        gsd_cm=gsd_cm,
        tile_width=tile_w,
        tile_height=tile_h,
        bands=bands,
        calibration=calibration,
        labels=labels,
        base_dir=path.parent,
    )


def write_manifest(manifest: DatasetManifest, path: str | Path):
    """Serialize a manifest to JSON (inverse of :func:`load_manifest`)."""
    doc: dict = {
        "camera": manifest.camera,
        "gsd_cm": manifest.gsd_cm,
        "tile": {"w": manifest.tile_width, "h": manifest.tile_height},
        "bands": [
            {
                "name": b.name,
                "center_nm": b.center_nm,
                "bandwidth_nm": b.bandwidth_nm,
                "path": b.path,
            }
            for b in manifest.bands
        ],
    }
    c = manifest.calibration
    if c is not None:
        doc["calibration"] = {
            "a1": c.a1,
            "a2": c.a2,
            "a3": c.a3,
            "exposure_s": c.exposure_s,
            "gain": c.gain,
            "black_level": c.black_level,
            "bit_depth": c.bit_depth,
            "vignette": {"ci": c.vignette_ci, "cj": c.vignette_cj, "q": list(c.vignette_q)},
            "panel": {
                "rho_per_band": list(c.panel_rho),
                "region": list(c.panel_region),
                "image_path": c.panel_image,
            },
        }
    if manifest.labels is not None:
        doc["labels"] = manifest.labels
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Plane IO (PNG / PGM)
# ---------------------------------------------------------------------------

def _read_pgm(path: Path) -> tuple[np.ndarray, int]:
    """Read a binary (P5) PGM; returns (integer array, maxval)."""
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise DecodeError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise DecodeError(f"{path}: bad PGM header") from e
    if width <= 0 or height <= 0 or not (0 < maxval < 65536):
        raise DecodeError(f"{path}: bad PGM dimensions/maxval")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    payload = data[pos : pos + count * dtype.itemsize]
    if len(payload) != count * dtype.itemsize:
        raise DecodeError(f"{path}: PGM payload truncated")
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return arr.astype(np.uint16 if maxval > 255 else np.uint8), maxval


def _write_pgm(path: Path, arr: np.ndarray, maxval: int):
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    path.write_bytes(header + np.ascontiguousarray(arr, dtype=dtype).tobytes())


def load_plane(path: str | Path) -> tuple[np.ndarray, int]:
    """Load a single-channel integer plane.

    Returns (array, maxval) where maxval is the container full-scale
    value (255 for 8-bit, 65535 for 16-bit PNG, the declared maxval for
    PGM).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"plane not found: {path}")
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.asarray(im)
    except (UnidentifiedImageError, OSError) as e:
        raise DecodeError(f"{path}: {e}") from e
    if mode == "L":
        return arr.astype(np.uint8), 255
    if mode in ("I;16", "I"):
        return arr.astype(np.uint16), 65535
    raise DecodeError(f"{path}: expected single-channel image, got mode '{mode}'")


def save_plane(path: str | Path, arr: np.ndarray, maxval: int = 65535):
    """Write an integer plane as PNG or PGM (chosen by extension)."""
    path = Path(path)
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise InvariantViolationError(f"plane must be 2-D, got shape {arr.shape}")
    if maxval not in (255, 65535) and path.suffix.lower() != ".pgm":
        raise InvariantViolationError("PNG planes support maxval 255 or 65535 only")
    if path.suffix.lower() == ".pgm":
        _write_pgm(path, arr, maxval)
        return
    if maxval == 255:
        Image.fromarray(arr.astype(np.uint8), mode="L").save(path, format="PNG")
    else:
        Image.fromarray(arr.astype(np.uint16)).save(path, format="PNG")


def quantize_unit(plane: np.ndarray, maxval: int = 65535) -> np.ndarray:
    """Map a float plane in [0, 1] to integers in [0, maxval] (round-half-even)."""
    scaled = np.clip(np.asarray(plane, dtype=np.float64), 0.0, 1.0) * maxval
    out = np.rint(scaled)
    return out.astype(np.uint8 if maxval <= 255 else np.uint16)


# ---------------------------------------------------------------------------
# Raster / label loading
# ---------------------------------------------------------------------------

def load_raster(manifest: DatasetManifest, name: str = "") -> MultispectralRaster:
    """Load all bands declared by a manifest into an aligned raster.

    Integer planes are scaled to [0, 1] by dividing by the container
    full-scale value; the scaling maps 0 to 0.0 and full scale to 1.0
    exactly.
    """
    bands: list[Band] = []
    dims: tuple[int, int] | None = None
    for entry in manifest.bands:
        arr, maxval = load_plane(manifest.resolve(entry.path))
        if dims is None:
            dims = arr.shape
        elif arr.shape != dims:
            raise DimensionMismatchError(
                f"band '{entry.name}' is {arr.shape[1]}x{arr.shape[0]}, "
                f"expected {dims[1]}x{dims[0]}"
            )
        plane = arr.astype(np.float32) / np.float32(maxval)
        bands.append(Band(entry.name, entry.center_nm, entry.bandwidth_nm, plane))
    return MultispectralRaster(bands=bands, gsd_cm=manifest.gsd_cm, name=name)


def load_labelmap(path: str | Path, class_count: int = CLASS_COUNT) -> LabelMap:
    arr, _ = load_plane(path)
    return LabelMap(labels=arr.astype(np.int64), class_count=class_count)


def save_labelmap(labels: LabelMap, path: str | Path):
    save_plane(path, labels.labels.astype(np.uint8), maxval=255)


# ---------------------------------------------------------------------------
# Probability-map container
# ---------------------------------------------------------------------------

def write_probability_map(pmap: ProbabilityMap, path: str | Path):
    """Write a probability map to the binary container format.

    Layout: 16-byte magic, one JSON header line ``{"w":..,"h":..,"c":..}``
    terminated by a newline, then ``c`` row-major little-endian float32
    planes. Round-trips bit-exactly.
    """
    pmap.validate_range()
    header = json.dumps(
        {"w": pmap.width, "h": pmap.height, "c": pmap.class_count},
        separators=(",", ":"),
    ).encode("ascii")
    planes = np.ascontiguousarray(pmap.planes, dtype="<f4")
    with open(path, "wb") as f:
        f.write(PROB_MAGIC)
        f.write(header + b"\n")
        f.flush()
        planes.tofile(f)


def read_probability_map(path: str | Path) -> ProbabilityMap:
    """Read a probability map written by :func:`write_probability_map`."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"probability map not found: {path}")
    with open(path, "rb") as f:
        magic = f.read(len(PROB_MAGIC))
        if magic != PROB_MAGIC:
            raise DecodeError(f"{path}: bad magic")
        header = f.readline(4096)
        try:
            meta = json.loads(header.decode("ascii"))
            w, h, c = int(meta["w"]), int(meta["h"]), int(meta["c"])
        except (ValueError, KeyError, UnicodeDecodeError) as e:
            raise DecodeError(f"{path}: bad header") from e
        if w <= 0 or h <= 0 or c <= 0:
            raise DecodeError(f"{path}: nonpositive dimensions in header")
        expected = w * h * c * 4
        payload = f.read(expected + 1)
        if len(payload) != expected:
            raise DecodeError(
                f"{path}: payload is {len(payload)} bytes, expected {expected}"
            )
    planes = np.frombuffer(payload, dtype="<f4").reshape(c, h, w).copy()
    pmap = ProbabilityMap(planes=planes)
    pmap.validate_range()
    return pmap
