"""Turn captured camera images into square, power-of-two grayscale frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from photomap._sampling import bilinear
from photomap.errors import TargetNotPowerOfTwo, TargetTooSmall

# Rec. 709 luma
LUMA = np.array([0.2126, 0.7152, 0.0722])

DEFAULT_FRAME_SIZE = 256
MIN_FRAME_SIZE = 64


def _check_unit_range(data):
    if not np.all(np.isfinite(data)):
        raise ValueError("image samples must be finite")
    if data.size and (data.min() < 0.0 or data.max() > 1.0):
        raise ValueError("image samples must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class RawImage:
    """Captured image, ``data`` of shape (H, W) or (H, W, 3) in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 3 and data.shape[2] == 1:
            data = data[:, :, 0]
        if data.ndim not in (2, 3) or (data.ndim == 3 and data.shape[2] != 3):
            raise ValueError(f"unsupported image shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        _check_unit_range(data)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else 3


@dataclass(frozen=True, eq=False)
class Frame:
    """Square grayscale raster ready for registration."""

    data: np.ndarray
    source_index: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"frame must be square 2-D, got {data.shape}")
        n = data.shape[0]
        if n < MIN_FRAME_SIZE or n & (n - 1):
            raise ValueError(f"frame size must be a power of two >= {MIN_FRAME_SIZE}, got {n}")
        _check_unit_range(data)
        object.__setattr__(self, "data", data)

    @property
    def size(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class CalibrationParams:
    """Two-coefficient radial distortion model; identity when disabled.

    Radii are normalised by half the larger image side, ``center`` is the
    principal point as a fraction of (width-1, height-1).
    """

    enabled: bool = False
    k1: float = 0.0
    k2: float = 0.0
    center: tuple[float, float] = (0.5, 0.5)


def to_grayscale(img: RawImage) -> RawImage:
    if img.channels == 1:
        return img
    return RawImage(np.clip(img.data @ LUMA, 0.0, 1.0))


def square_crop(img: RawImage) -> RawImage:
    """Centred s x s crop, s = min(W, H); an odd leftover goes off the high side."""
    h, w = img.height, img.width
    s = min(h, w)
    top = (h - s) // 2
    left = (w - s) // 2
    if top == 0 and left == 0 and h == w:
        return img
    return RawImage(img.data[top:top + s, left:left + s].copy())


def resample(data, target: int) -> np.ndarray:
    """Bilinear resize of a square raster to ``target`` x ``target``.

    Pixel centres are aligned (half-pixel convention) and the border is
    clamped, so a same-size resize is an exact copy.
    """
    data = np.asarray(data, dtype=np.float64)
    src = data.shape[0]
    if src == target:
        return data.copy()
    c = (np.arange(target) + 0.5) * (src / target) - 0.5
    xx, yy = np.meshgrid(c, c)
    out, _ = bilinear(data, xx, yy, clamp=True)
    return out


def resize_pow2(img: RawImage, target: int = DEFAULT_FRAME_SIZE, source_index: int = 0) -> Frame:
    if target <= 0 or target & (target - 1):
        raise TargetNotPowerOfTwo(f"target size {target} is not a power of two")
    if target < MIN_FRAME_SIZE:
        raise TargetTooSmall(f"target size {target} < {MIN_FRAME_SIZE}")
    if img.channels != 1 or img.width != img.height:
        raise ValueError("resize_pow2 expects a square single-channel image")
    return Frame(np.clip(resample(img.data, target), 0.0, 1.0), source_index)


def undistort(img: RawImage, calib: CalibrationParams) -> RawImage:
    """Inverse-map every output pixel through ``r_d = r (1 + k1 r^2 + k2 r^4)``."""
    if not calib.enabled:
        return img
    h, w = img.height, img.width
    cx = calib.center[0] * (w - 1)
    cy = calib.center[1] * (h - 1)
    norm = 0.5 * max(w, h)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    u = (xx - cx) / norm
    v = (yy - cy) / norm
    r2 = u * u + v * v
    factor = 1.0 + calib.k1 * r2 + calib.k2 * r2 * r2
    sx = cx + u * factor * norm
    sy = cy + v * factor * norm
    if img.channels == 1:
        out, _ = bilinear(img.data, sx, sy)
    else:
        out = np.stack([bilinear(img.data[:, :, k], sx, sy)[0] for k in range(3)], axis=-1)
    return RawImage(np.clip(out, 0.0, 1.0))


def prepare_frame(img: RawImage, size: int = DEFAULT_FRAME_SIZE,
                  calib: CalibrationParams | None = None, source_index: int = 0) -> Frame:
    """grayscale -> undistort -> centred square crop -> power-of-two resize."""
    gray = to_grayscale(img)
    if calib is not None:
        gray = undistort(gray, calib)
    return resize_pow2(square_crop(gray), size, source_index)
