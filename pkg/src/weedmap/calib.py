"""Radiometric calibration of raw sensor planes to reflectance.

The chain has three stages: a 5th-order radial vignette correction, a
raw-count to radiance conversion using the sensor's radiometric
coefficients, and a panel-based radiance-to-reflectance factor derived
from a calibrated reflectance panel (CRP) of known albedo.

Per pixel at row ``i``, column ``j``:

    V(i, j)  = 1 / (1 + sum_t q_t * r**(t+1)),   r = dist to vignette center
    L(i, j)  = V * (a1 / gain) * (p_raw/2^n - black) / (expo + a2*j - a3*expo*j)
    refl     = L * f_k,   f_k = rho_k / mean(L over panel region)

Internally everything is computed in float64; calibrated bands are
stored as float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVignetteError,
    InvariantViolationError,
    NonPositivePanelRadianceError,
    ZeroDenominatorError,
)
from .raster import Band, CalibrationBlock

# divisor floors below which the models are considered nonphysical
VIGNETTE_DIVISOR_MIN = 1e-9
EXPOSURE_DENOM_MIN = 1e-12

# calibrated reflectance is clamped to [0, REFLECTANCE_CEILING]; specular
# pixels can legitimately exceed 1
REFLECTANCE_CEILING = 1.5

VALID_BIT_DEPTHS = (8, 10, 12, 16)


@dataclass(frozen=True)
class RadiometricParams:
    """Sensor calibration constants for one band."""

    a1: float
    a2: float
    a3: float
    exposure_s: float
    gain: float
    black_level: float  # normalized, in [0, 1)
    bit_depth: int
    vignette_center: tuple[float, float]  # (c_i, c_j) = (row, col)
    vignette_coeffs: tuple[float, ...]  # q_0 .. q_5

    def __post_init__(self):
        if self.exposure_s <= 0:
            raise InvariantViolationError("exposure_s must be > 0")
        if self.gain <= 0:
            raise InvariantViolationError("gain must be > 0")
        if not (0.0 <= self.black_level < 1.0):
            raise InvariantViolationError("black_level must lie in [0, 1)")
        if self.bit_depth not in VALID_BIT_DEPTHS:
            raise InvariantViolationError(
                f"bit_depth must be one of {VALID_BIT_DEPTHS}"
            )
        if len(self.vignette_coeffs) != 6:
            raise InvariantViolationError("vignette_coeffs must have 6 entries")

    @classmethod
    def identity(cls, bit_depth: int = 16) -> "RadiometricParams":
        """Parameters that make radiance equal the normalized raw value."""
        return cls(
            a1=1.0, a2=0.0, a3=0.0,
            exposure_s=1.0, gain=1.0, black_level=0.0,
            bit_depth=bit_depth,
            vignette_center=(0.0, 0.0),
            vignette_coeffs=(0.0,) * 6,
        )

    @classmethod
    def from_block(cls, block: CalibrationBlock) -> "RadiometricParams":
        return cls(
            a1=block.a1, a2=block.a2, a3=block.a3,
            exposure_s=block.exposure_s,
            gain=block.gain,
            black_level=block.black_level,
            bit_depth=block.bit_depth,
            vignette_center=(block.vignette_ci, block.vignette_cj),
            vignette_coeffs=block.vignette_q,
        )


@dataclass(frozen=True)
class PanelSpec:
    """Known panel reflectance and its pixel region in the panel image."""

    rho: float  # average panel reflectance for this band, in (0, 1]
    region: tuple[int, int, int, int]  # (x, y, w, h)

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise InvariantViolationError("panel rho must lie in (0, 1]")
        x, y, w, h = self.region
        if w <= 0 or h <= 0:
            raise InvariantViolationError("panel region is empty")

    def slice_of(self, plane: np.ndarray) -> np.ndarray:
        x, y, w, h = self.region
        if x < 0 or y < 0 or x + w > plane.shape[1] or y + h > plane.shape[0]:
            raise InvariantViolationError(
                f"panel region {self.region} exceeds image bounds "
                f"{plane.shape[1]}x{plane.shape[0]}"
            )
        return plane[y : y + h, x : x + w]


def _vignette_divisor(i, j, params: RadiometricParams) -> np.ndarray:
    ci, cj = params.vignette_center
    r = np.hypot(np.asarray(i, dtype=np.float64) - ci,
                 np.asarray(j, dtype=np.float64) - cj)
    # C = 1 + q0*r + q1*r^2 + ... + q5*r^6
    poly = np.polyval(params.vignette_coeffs[::-1], r)
    return 1.0 + poly * r


def vignette_factor(i, j, params: RadiometricParams):
    """Vignette gain at pixel (row i, col j); 1.0 at the vignette center.

    Accepts scalars or broadcastable arrays. Raises if the polynomial
    divisor becomes nonphysical (<= ~0) anywhere.
    """
    divisor = _vignette_divisor(i, j, params)
    if np.any(divisor <= VIGNETTE_DIVISOR_MIN):
        raise DegenerateVignetteError(
            f"vignette divisor reaches {float(np.min(divisor)):g}"
        )
    out = 1.0 / divisor
    return float(out) if np.isscalar(i) and np.isscalar(j) else out


def _exposure_denominator(j, params: RadiometricParams) -> np.ndarray:
    j = np.asarray(j, dtype=np.float64)
    return params.exposure_s + (params.a2 - params.a3 * params.exposure_s) * j


def radiance(p_raw: float, i: int, j: int, params: RadiometricParams) -> float:
    """Radiance of one pixel from its raw count (scalar reference path).

    May be negative when the raw value is below the black level; band
    calibration clamps.
    """
    denom = float(_exposure_denominator(j, params))
    if abs(denom) < EXPOSURE_DENOM_MIN:
        raise ZeroDenominatorError(f"exposure denominator ~0 at column {j}")
    p_norm = float(p_raw) / float(2 ** params.bit_depth)
    v = vignette_factor(i, j, params)
    return v * (params.a1 / params.gain) * (p_norm - params.black_level) / denom


def radiance_plane(raw_plane: np.ndarray, params: RadiometricParams) -> np.ndarray:
    """Vectorized radiance for a whole raw plane; returns float64 (H, W)."""
    raw_plane = np.asarray(raw_plane)
    if raw_plane.ndim != 2:
        raise InvariantViolationError(
            f"raw plane must be 2-D, got shape {raw_plane.shape}"
        )
    h, w = raw_plane.shape
    denom = _exposure_denominator(np.arange(w), params)
    if np.min(np.abs(denom)) < EXPOSURE_DENOM_MIN:
        raise ZeroDenominatorError("exposure denominator ~0 inside the plane")
    ci, cj = params.vignette_center
    r = np.hypot(
        (np.arange(h, dtype=np.float64) - ci)[:, None],
        (np.arange(w, dtype=np.float64) - cj)[None, :],
    )
    divisor = 1.0 + np.polyval(params.vignette_coeffs[::-1], r) * r
    if np.any(divisor <= VIGNETTE_DIVISOR_MIN):
        raise DegenerateVignetteError(
            f"vignette divisor reaches {float(np.min(divisor)):g}"
        )
    p_norm = raw_plane.astype(np.float64) / float(2 ** params.bit_depth)
    return (params.a1 / params.gain) * (p_norm - params.black_level) \
        / (divisor * denom[None, :])


def reflectance_factor(
    panel_plane: np.ndarray, spec: PanelSpec, params: RadiometricParams
) -> float:
    """Radiance-to-reflectance factor from a raw image of the panel.

    f = rho / mean radiance over the panel region.
    """
    radiances = radiance_plane(panel_plane, params)
    avg = float(spec.slice_of(radiances).mean(dtype=np.float64))
    if avg <= 0.0:
        raise NonPositivePanelRadianceError(
            f"panel region mean radiance is {avg:g}"
        )
    return spec.rho / avg


def calibrate_band(
    raw_plane: np.ndarray,
    params: RadiometricParams,
    factor: float,
    name: str = "band",
    center_nm: float = 0.0,
    bandwidth_nm: float = 0.0,
) -> Band:
    """Convert a raw integer plane to a reflectance band.

    Values are clamped to [0, 1.5]: negative radiance (raw below black
    level) is floored at 0 and specular highlights are capped.
    """
    refl = radiance_plane(raw_plane, params) * factor
    np.clip(refl, 0.0, REFLECTANCE_CEILING, out=refl)
    return Band(
        name=name,
        center_nm=center_nm,
        bandwidth_nm=bandwidth_nm,
        plane=refl.astype(np.float32),
    )
