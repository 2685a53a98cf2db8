"""Dataset statistics: class balance weights, ground sampling, coverage.

Class imbalance is summarized by frequency of appearance (FoA): for
each class, its total pixel count divided by the total pixel count of
only those images where the class appears at all. Loss weights are the
median of the nonzero FoA values divided by each class's FoA, so the
median-frequency class gets weight 1 and rare classes get large
weights. A class absent from every image has FoA 0, is excluded from
the median, and gets weight 0 with a flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AllClassesAbsentError, EmptyDatasetError, NonPositiveInputError
from .raster import LabelMap


@dataclass(frozen=True)
class ClassFrequency:
    """Per-class pixel tallies across a label-map collection."""

    pixel_counts: tuple[int, ...]
    presence_pixel_totals: tuple[int, ...]  # pixels of images containing the class
    foa: tuple[float, ...]

    @property
    def class_count(self) -> int:
        return len(self.foa)


@dataclass(frozen=True)
class ClassWeights:
    """Median-frequency balancing weights; absent classes are flagged."""

    weights: tuple[float, ...]
    absent: tuple[bool, ...]


def compute_foa(
    label_maps: Sequence[LabelMap], class_count: int = 3
) -> ClassFrequency:
    """Frequency of appearance of each class over a set of label maps."""
    if len(label_maps) == 0:
        raise EmptyDatasetError("no label maps given")
    pixel_counts = np.zeros(class_count, dtype=np.int64)
    presence_totals = np.zeros(class_count, dtype=np.int64)
    for lm in label_maps:
        counts = np.bincount(lm.labels.ravel(), minlength=class_count)
        pixel_counts += counts
        presence_totals += np.where(counts > 0, lm.labels.size, 0)
    foa = np.zeros(class_count, dtype=np.float64)
    np.divide(pixel_counts, presence_totals, out=foa, where=presence_totals > 0)
    return ClassFrequency(
        pixel_counts=tuple(int(v) for v in pixel_counts),
        presence_pixel_totals=tuple(int(v) for v in presence_totals),
        foa=tuple(float(v) for v in foa),
    )


def class_weights(freq: ClassFrequency) -> ClassWeights:
    """Median-frequency loss weights from FoA values."""
    foa = np.asarray(freq.foa, dtype=np.float64)
    present = foa > 0
    if not present.any():
        raise AllClassesAbsentError("every class has zero frequency")
    med = float(np.median(foa[present]))
    weights = np.zeros_like(foa)
    weights[present] = med / foa[present]
    return ClassWeights(
        weights=tuple(float(w) for w in weights),
        absent=tuple(bool(a) for a in ~present),
    )


def theoretical_gsd(
    pixel_size_um: float, focal_mm: float, altitude_m: float
) -> float:
    """Ground sampling distance in cm/px from sensor geometry.

    gsd = pixel_size * altitude / focal_length, converted so that
    micrometers, meters and millimeters come out in centimeters.
    """
    if pixel_size_um <= 0 or focal_mm <= 0 or altitude_m <= 0:
        raise NonPositiveInputError(
            "pixel size, focal length and altitude must all be > 0"
        )
    return pixel_size_um * altitude_m / (focal_mm * 10.0)


def covered_area(mask: np.ndarray, gsd_cm: float) -> float:
    """Hectares covered by the nonzero pixels of a mask at a given GSD."""
    if gsd_cm <= 0:
        raise NonPositiveInputError(f"gsd_cm must be > 0, got {gsd_cm}")
    pixels = int(np.count_nonzero(np.asarray(mask)))
    meters_per_px = gsd_cm / 100.0
    return pixels * meters_per_px * meters_per_px / 1e4
