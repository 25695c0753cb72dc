"""Input validation helpers shared by the estimator facade.

These normalize user-facing array inputs into the shapes the domain
modules expect and fail with messages that name the offending argument.
"""

from __future__ import annotations

import numpy as np

from turbsim.optics import TurbulenceProtocol

__all__ = ["as_image", "as_image_batch", "ensure_raster"]


def as_image(x, name: str = "image") -> np.ndarray:
    """Validate one (H, W) or (H, W, C) float image."""
    arr = np.asarray(x)
    if arr.ndim not in (2, 3):
        raise ValueError(f"{name} must be (H, W) or (H, W, C), "
                         f"got shape {arr.shape}")
    if arr.ndim == 3 and arr.shape[2] < 1:
        raise ValueError(f"{name} has zero channels: {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_image_batch(X, name: str = "X") -> np.ndarray:
    """Validate a batch: (N, H, W) or (N, H, W, C) array, or a sequence
    of equally shaped images."""
    if isinstance(X, np.ndarray):
        if X.ndim not in (3, 4):
            raise ValueError(f"{name} must be (N, H, W) or (N, H, W, C), "
                             f"got shape {X.shape}")
        images = [as_image(X[i], name=f"{name}[{i}]")
                  for i in range(X.shape[0])]
    else:
        images = [as_image(img, name=f"{name}[{i}]")
                  for i, img in enumerate(X)]
        if not images:
            raise ValueError(f"{name} is empty")
        shapes = {img.shape for img in images}
        if len(shapes) > 1:
            raise ValueError(f"{name} mixes image shapes: {sorted(shapes)}")
    return np.stack(images) if images else np.empty((0,))


def ensure_raster(shape: tuple, protocol: TurbulenceProtocol,
                  name: str = "image") -> None:
    expected = (protocol.image_height_px, protocol.image_width_px)
    if tuple(shape[:2]) != expected:
        raise ValueError(f"{name} raster {tuple(shape[:2])} does not match "
                         f"protocol raster {expected}")
