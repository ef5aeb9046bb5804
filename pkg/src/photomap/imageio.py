"""PNG / PGM / PPM reading and grayscale PNG writing (OpenCV backed)."""

from pathlib import Path

import cv2
import numpy as np

from photomap.preprocess import RawImage

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")


def read_image(path) -> RawImage:
    """Decode an 8/16-bit gray or RGB image into [0, 1] samples."""
    path = Path(path)
    if not path.is_file():
        raise OSError(f"cannot read {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot decode {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise OSError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[:, :, :3]
        if raw.shape[2] == 3:
            raw = raw[:, :, ::-1]  # BGR -> RGB
        elif raw.shape[2] == 2:
            raw = raw[:, :, 0]
    return RawImage(raw.astype(np.float64) / scale)


def write_gray(path, data, bits: int = 8) -> None:
    """Quantise a [0, 1] raster to ``bits`` (8 or 16) and write it losslessly."""
    if bits == 8:
        q = np.round(np.clip(data, 0.0, 1.0) * 255.0).astype(np.uint8)
    elif bits == 16:
        q = np.round(np.clip(data, 0.0, 1.0) * 65535.0).astype(np.uint16)
    else:
        raise ValueError("bits must be 8 or 16")
    if not cv2.imwrite(str(path), q):
        raise OSError(f"cannot write {path}")


def list_images(directory) -> list[Path]:
    """Image files in ``directory`` in plain lexicographic name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise OSError(f"not a directory: {directory}")
    return sorted((p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
                  key=lambda p: p.name)
