"""Image-domain degradation operators and their exact adjoints.

The forward model for one observed frame is

    O = B(T(I)) + sigma * n

where ``T`` warps the ideal image by the per-pixel tilt shifts, ``B``
applies the spatially varying blur through the kernel basis, and ``n`` is
white Gaussian read noise.  Geometric distortion happens before blur.

Both operators are linear in the image, and both ship with hand-derived
adjoints that satisfy <A x, y> == <x, A^T y> to rounding.  That exactness
is what makes the simulator usable inside gradient-based restoration: the
vector-Jacobian product of the forward model is just the adjoint chain in
reverse order.

Blur uses the gather form

    (B I)(x) = sum_k beta_k(x) * (psi_k (*) I)(x)

with replicate padding of r = s // 2 pixels per side.  A circular FFT of
size exactly (H + 2r, W + 2r) is alias-free here for both directions:
the forward valid slice starts at 2r = s - 1, which is the first index
untouched by wraparound, and the adjoint embeds its cotangent at offset
2r so wrapped taps only ever read zeros.  For 256 px rasters and s = 33
that lands on 288, a fast FFT size.

Operators follow the dtype of the image they are given: float32 in,
float32 out.  Gradient checks should run in float64.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from turbsim import rng
from turbsim.field import ZernikeField, build_autocorrelation, sample_field
from turbsim.optics import TurbulenceProtocol, tilt_pixel_scale
from turbsim.psf import CoeffMaps, P2sMap, PsfBasis, p2s_eval

__all__ = [
    "ShiftField",
    "DegradationRealization",
    "tilt_shifts",
    "tilt_warp",
    "tilt_warp_adjoint",
    "sv_blur",
    "sv_blur_adjoint",
    "realize",
    "simulate_forward",
    "simulate_vjp",
]


def _check_image(image) -> np.ndarray:
    img = np.asarray(image)
    if not np.issubdtype(img.dtype, np.floating):
        img = img.astype(np.float64)
    if img.ndim not in (2, 3):
        raise ValueError(f"image must be (H, W) or (H, W, C), got {img.shape}")
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError(f"image raster too small: {img.shape}")
    return img


# ---------------------------------------------------------------------------
# Tilt warp


@dataclass(frozen=True)
class ShiftField:
    """Per-pixel sampling displacements, in pixels.

    ``shifts[y, x, 0]`` is the row offset and ``shifts[y, x, 1]`` the
    column offset of the source location sampled into output pixel
    (y, x): the warp reads the input at (y + dy, x + dx) with bilinear
    interpolation, clamped at the frame edge.
    """

    shifts: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.shifts, dtype=np.float64)
        if s.ndim != 3 or s.shape[2] != 2:
            raise ValueError(f"shifts must be (H, W, 2), got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("shifts must be finite")
        object.__setattr__(self, "shifts", s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.shifts.shape[:2]


def tilt_shifts(field: ZernikeField) -> ShiftField:
    """Pixel shift field from the two tilt channels of a coefficient field.

    Noll mode 2 tips the wavefront across the horizontal pupil axis and
    moves the image column-wise; mode 3 moves it row-wise.
    """
    c = tilt_pixel_scale(field.protocol)
    out = np.empty(field.shape + (2,), dtype=np.float64)
    out[:, :, 0] = c * field.data[:, :, 2]
    out[:, :, 1] = c * field.data[:, :, 1]
    return ShiftField(out)


def _warp_coords(shift_field: ShiftField, shape: tuple[int, int]):
    h, w = shape
    if shift_field.shape != (h, w):
        raise ValueError(
            f"shift field {shift_field.shape} does not match image {(h, w)}")
    s = shift_field.shifts
    ys = np.arange(h, dtype=np.float64)[:, None] + s[:, :, 0]
    xs = np.arange(w, dtype=np.float64)[None, :] + s[:, :, 1]
    np.clip(ys, 0.0, h - 1.0, out=ys)
    np.clip(xs, 0.0, w - 1.0, out=xs)
    y0 = np.minimum(ys.astype(np.int64), h - 2)
    x0 = np.minimum(xs.astype(np.int64), w - 2)
    wy = ys - y0
    wx = xs - x0
    return y0, x0, wy, wx


def tilt_warp(image, shift_field: ShiftField) -> np.ndarray:
    """Bilinear backward warp; out-of-frame samples clamp to the edge."""
    img = _check_image(image)
    y0, x0, wy, wx = _warp_coords(shift_field, img.shape[:2])
    if img.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    out = ((1 - wy) * (1 - wx) * img[y0, x0]
           + (1 - wy) * wx * img[y0, x0 + 1]
           + wy * (1 - wx) * img[y0 + 1, x0]
           + wy * wx * img[y0 + 1, x0 + 1])
    return out.astype(img.dtype, copy=False)


def tilt_warp_adjoint(cotangent, shift_field: ShiftField) -> np.ndarray:
    """Exact transpose of :func:`tilt_warp` at the same shift field."""
    ct = _check_image(cotangent)
    h, w = ct.shape[:2]
    y0, x0, wy, wx = _warp_coords(shift_field, (h, w))
    base = (y0 * w + x0).ravel()
    corners = ((0, (1 - wy) * (1 - wx)), (1, (1 - wy) * wx),
               (w, wy * (1 - wx)), (w + 1, wy * wx))
    if ct.ndim == 2:
        planes = ct[None]
    else:
        planes = np.moveaxis(ct, 2, 0)
    acc = np.zeros((planes.shape[0], h * w), dtype=np.float64)
    for off, wgt in corners:
        idx = base + off
        for c in range(planes.shape[0]):
            acc[c] += np.bincount(idx, weights=(wgt * planes[c]).ravel(),
                                  minlength=h * w)
    out = acc.reshape(planes.shape[0], h, w)
    out = out[0] if ct.ndim == 2 else np.moveaxis(out, 0, 2)
    return out.astype(ct.dtype, copy=False)


# ---------------------------------------------------------------------------
# Spatially varying blur


_kfft_cache: dict[tuple, tuple] = {}
_kfft_lock = threading.Lock()


def _kernel_ffts(kernels: np.ndarray, fshape: tuple[int, int],
                 dtype: np.dtype) -> np.ndarray:
    key = (id(kernels), fshape, np.dtype(dtype).str)
    with _kfft_lock:
        hit = _kfft_cache.get(key)
    if hit is not None and hit[0] is kernels:
        return hit[1]
    spec = sfft.rfft2(kernels.astype(dtype, copy=False), s=fshape,
                      axes=(1, 2))
    with _kfft_lock:
        if len(_kfft_cache) >= 8:
            _kfft_cache.clear()
        _kfft_cache[key] = (kernels, spec)
    return spec


def _check_blur_args(img: np.ndarray, beta, kernels):
    beta = np.asarray(beta)
    kernels = np.asarray(kernels)
    if kernels.ndim != 3 or kernels.shape[1] != kernels.shape[2]:
        raise ValueError(f"kernels must be (K, s, s), got {kernels.shape}")
    s = kernels.shape[1]
    if s % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {s}")
    h, w = img.shape[:2]
    if beta.shape != (h, w, kernels.shape[0]):
        raise ValueError(
            f"beta must be {(h, w, kernels.shape[0])}, got {beta.shape}")
    return beta, kernels


def _blur_plane(plane: np.ndarray, beta: np.ndarray,
                kernels: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    r = kernels.shape[1] // 2
    fshape = (h + 2 * r, w + 2 * r)
    padded = np.pad(plane, r, mode="edge")
    spec_k = _kernel_ffts(kernels, fshape, padded.dtype)
    convs = sfft.irfft2(sfft.rfft2(padded)[None] * spec_k, s=fshape,
                        axes=(1, 2))
    valid = convs[:, 2 * r:2 * r + h, 2 * r:2 * r + w]
    return np.einsum("khw,hwk->hw", valid, beta, optimize=True)


def _blur_plane_adjoint(plane: np.ndarray, beta: np.ndarray,
                        kernels: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    r = kernels.shape[1] // 2
    fshape = (h + 2 * r, w + 2 * r)
    weighted = np.einsum("hwk->khw", beta * plane[:, :, None])
    embedded = np.zeros((kernels.shape[0],) + fshape, dtype=plane.dtype)
    embedded[:, 2 * r:, 2 * r:] = weighted
    spec_g = sfft.rfft2(embedded, axes=(1, 2))
    spec_k = _kernel_ffts(kernels, fshape, plane.dtype)
    corr = sfft.irfft2(spec_k.conj() * spec_g, s=fshape, axes=(1, 2))
    folded = corr.sum(axis=0)
    # Transpose of replicate padding: border bands collapse onto edge
    # rows/columns.
    core = folded[r:r + h, :].copy()
    core[0] += folded[:r, :].sum(axis=0)
    core[-1] += folded[r + h:, :].sum(axis=0)
    out = core[:, r:r + w].copy()
    out[:, 0] += core[:, :r].sum(axis=1)
    out[:, -1] += core[:, r + w:].sum(axis=1)
    return out


def sv_blur(image, beta, kernels) -> np.ndarray:
    """Spatially varying blur: per-pixel mix of basis-kernel convolutions.

    ``beta`` is (H, W, K) and ``kernels`` (K, s, s).  Boundary policy is
    replicate padding by s // 2 pixels.  Cost is one FFT per kernel and
    is independent of how the weights vary.
    """
    img = _check_image(image)
    beta, kernels = _check_blur_args(img, beta, kernels)
    beta = beta.astype(img.dtype, copy=False)
    kernels = np.ascontiguousarray(kernels)
    if img.ndim == 2:
        return _blur_plane(img, beta, kernels).astype(img.dtype, copy=False)
    planes = [_blur_plane(img[:, :, c], beta, kernels)
              for c in range(img.shape[2])]
    return np.stack(planes, axis=2).astype(img.dtype, copy=False)


def sv_blur_adjoint(cotangent, beta, kernels) -> np.ndarray:
    """Exact transpose of :func:`sv_blur` at the same weights."""
    ct = _check_image(cotangent)
    beta, kernels = _check_blur_args(ct, beta, kernels)
    beta = beta.astype(ct.dtype, copy=False)
    kernels = np.ascontiguousarray(kernels)
    if ct.ndim == 2:
        return _blur_plane_adjoint(ct, beta, kernels).astype(ct.dtype,
                                                             copy=False)
    planes = [_blur_plane_adjoint(ct[:, :, c], beta, kernels)
              for c in range(ct.shape[2])]
    return np.stack(planes, axis=2).astype(ct.dtype, copy=False)


# ---------------------------------------------------------------------------
# Realized degradations


@dataclass
class DegradationRealization:
    """One frozen draw of the random degradation for a protocol.

    Everything the forward model needs is here: tilt shifts, per-pixel
    kernel weights, the kernel bank, the noise scale, and the seed that
    regenerates the noise plane.  A (protocol, seed, basis) triple fully
    determines the realization, which is what dataset sidecars record.
    """

    protocol: TurbulenceProtocol
    seed: int
    shift_field: ShiftField
    coeff_maps: CoeffMaps
    basis: PsfBasis
    basis_hash: str | None = None
    noise_seed: int | None = None

    def __post_init__(self) -> None:
        h = self.protocol.image_height_px
        w = self.protocol.image_width_px
        if self.shift_field.shape != (h, w):
            raise ValueError("shift field does not match protocol raster")
        if self.coeff_maps.beta.shape[:2] != (h, w):
            raise ValueError("coefficient maps do not match protocol raster")
        if self.coeff_maps.beta.shape[2] != self.basis.k:
            raise ValueError("coefficient maps do not match basis size")

    @property
    def shape(self) -> tuple[int, int]:
        return self.shift_field.shape

    def noise_plane(self, channels: int = 0) -> np.ndarray:
        """Unit-variance noise, regenerated from the seed.

        ``channels == 0`` gives a (H, W) plane; otherwise (H, W, C) with
        one independent stream per channel, so RGB degradation does not
        reuse noise across channels.
        """
        h, w = self.shape
        n = max(1, channels)
        seed = self.seed if self.noise_seed is None else self.noise_seed
        planes = np.stack([
            rng.normals(seed, rng.stream_id(rng.DOMAIN_NOISE, c),
                        h * w).reshape(h, w)
            for c in range(n)], axis=2)
        return planes[:, :, 0] if channels == 0 else planes


def realize(p: TurbulenceProtocol, seed, basis: PsfBasis, p2s: P2sMap,
            basis_hash: str | None = None,
            noise_seed: int | None = None) -> DegradationRealization:
    """Draw the coefficient field for (protocol, seed) and bind operators.

    ``noise_seed`` separates the read-noise stream from the field stream;
    left unset, both derive from ``seed`` (they still never collide, the
    stream domains differ).
    """
    seed = int(seed)
    ac = build_autocorrelation(p)
    field = sample_field(ac, p, seed)
    maps = p2s_eval(p2s, basis, field, mode="surrogate")
    return DegradationRealization(
        protocol=p, seed=seed, shift_field=tilt_shifts(field),
        coeff_maps=maps, basis=basis, basis_hash=basis_hash,
        noise_seed=None if noise_seed is None else int(noise_seed))


def simulate_forward(image, realization: DegradationRealization,
                     with_noise: bool = True) -> np.ndarray:
    """Apply warp, then blur, then optionally add read noise."""
    img = _check_image(image)
    if img.shape[:2] != realization.shape:
        raise ValueError(
            f"image {img.shape[:2]} does not match realization "
            f"{realization.shape}")
    warped = tilt_warp(img, realization.shift_field)
    blurred = sv_blur(warped, realization.coeff_maps.beta,
                      realization.basis.kernels)
    sigma = realization.protocol.noise_sigma
    if with_noise and sigma > 0:
        channels = 0 if img.ndim == 2 else img.shape[2]
        noise = realization.noise_plane(channels).astype(img.dtype)
        blurred = blurred + sigma * noise
    return blurred.astype(img.dtype, copy=False)


def simulate_vjp(cotangent, realization: DegradationRealization) -> np.ndarray:
    """Gradient of <cotangent, forward(image)> with respect to the image.

    The forward map is affine in the image, so the VJP is the adjoint
    chain applied to the cotangent and does not depend on the image or
    the noise term.
    """
    ct = _check_image(cotangent)
    if ct.shape[:2] != realization.shape:
        raise ValueError(
            f"cotangent {ct.shape[:2]} does not match realization "
            f"{realization.shape}")
    back = sv_blur_adjoint(ct, realization.coeff_maps.beta,
                           realization.basis.kernels)
    return tilt_warp_adjoint(back, realization.shift_field)
