"""Image fidelity metrics used by the restoration loop and dataset QA.

Both metrics treat the first argument as the reference.  Images may be
(H, W) or (H, W, C); channels are averaged after per-channel evaluation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

__all__ = ["psnr", "ssim"]

_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5          # 11 x 11 window
_K1 = 0.01
_K2 = 0.03


def _pair(reference, test) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    if ref.ndim not in (2, 3):
        raise ValueError(f"images must be (H, W) or (H, W, C), got {ref.shape}")
    return ref, tst


def psnr(reference, test, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    ref, tst = _pair(reference, test)
    if data_range <= 0:
        raise ValueError(f"data_range must be positive, got {data_range}")
    mse = float(np.mean((ref - tst) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range * data_range / mse)


def _ssim_window() -> np.ndarray:
    x = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * _SSIM_SIGMA * _SSIM_SIGMA))
    win = np.outer(g, g)
    return win / win.sum()


def _ssim_plane(ref: np.ndarray, tst: np.ndarray, data_range: float) -> float:
    win = _ssim_window()
    mu1 = fftconvolve(ref, win, mode="valid")
    mu2 = fftconvolve(tst, win, mode="valid")
    s11 = fftconvolve(ref * ref, win, mode="valid") - mu1 * mu1
    s22 = fftconvolve(tst * tst, win, mode="valid") - mu2 * mu2
    s12 = fftconvolve(ref * tst, win, mode="valid") - mu1 * mu2
    c1 = (_K1 * data_range) ** 2
    c2 = (_K2 * data_range) ** 2
    num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def ssim(reference, test, data_range: float = 1.0) -> float:
    """Mean structural similarity over the valid (unpadded) region.

    Gaussian weighting window, 11 x 11 at sigma 1.5; border pixels whose
    window would leave the frame are excluded rather than padded, so the
    score never rewards boundary extrapolation.
    """
    ref, tst = _pair(reference, test)
    if data_range <= 0:
        raise ValueError(f"data_range must be positive, got {data_range}")
    if min(ref.shape[0], ref.shape[1]) < 2 * _SSIM_RADIUS + 1:
        raise ValueError(
            f"images must be at least {2 * _SSIM_RADIUS + 1} px per side")
    if ref.ndim == 2:
        return _ssim_plane(ref, tst, data_range)
    return float(np.mean([_ssim_plane(ref[:, :, c], tst[:, :, c], data_range)
                          for c in range(ref.shape[2])]))
