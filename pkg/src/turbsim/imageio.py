"""Image file IO for dataset artifacts.

Two encodings cover the pipeline's needs: 8-bit PNG for browsable
outputs, and a small self-describing float32 container for exact
round-trips (PNG quantization would break bit-level reproducibility
checks).  Raw files are little-endian and carry a 20-byte header with
the raster shape, so a file is readable without its sidecar.
"""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image

__all__ = ["save_png", "load_png", "save_raw", "load_raw"]

_RAW_MAGIC = b"TRAW"
_RAW_VERSION = 1


def _check(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ValueError(f"expected (H, W) or (H, W, 3), got {arr.shape}")
    return arr


def save_png(path, img) -> None:
    """Write a float image in [0, 1] as 8-bit PNG (values are clipped)."""
    arr = _check(img)
    q = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(q).save(path, format="PNG")


def load_png(path) -> np.ndarray:
    """Read an image as float32 in [0, 1]; grayscale gives (H, W).

    Anything that is not single-channel comes back as RGB, so downstream
    code only ever sees one or three channels.
    """
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("RGB")
        arr = np.asarray(im)
    return arr.astype(np.float32) / 255.0


def save_raw(path, img) -> None:
    """Write float32 planes with an exact little-endian round trip."""
    arr = _check(np.asarray(img, dtype=np.float32))
    h, w = arr.shape[:2]
    c = 1 if arr.ndim == 2 else arr.shape[2]
    with open(path, "wb") as fh:
        fh.write(_RAW_MAGIC)
        fh.write(struct.pack("<IIII", _RAW_VERSION, h, w, c))
        fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_raw(path) -> np.ndarray:
    """Read a raw float32 container written by :func:`save_raw`."""
    with open(path, "rb") as fh:
        head = fh.read(20)
        if len(head) < 20 or head[:4] != _RAW_MAGIC:
            raise ValueError(f"not a raw float image file: {path}")
        version, h, w, c = struct.unpack("<IIII", head[4:])
        if version != _RAW_VERSION:
            raise ValueError(f"unsupported raw image version {version}")
        data = np.frombuffer(fh.read(4 * h * w * c), dtype="<f4")
        if data.size != h * w * c:
            raise ValueError(f"raw image file truncated: {path}")
    arr = data.reshape((h, w) if c == 1 else (h, w, c))
    return arr.astype(np.float32, copy=False)
