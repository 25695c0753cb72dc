"""Wide-sense-stationary Zernike coefficient fields over the image raster.

The anisoplanatic model assigns every output pixel its own 36-vector of
Noll coefficients.  The joint law is separable: a 36x36 modal covariance
(identical at every pixel) times a per-class spatial correlation kernel,
one kernel for the tilt pair (modes 2, 3) and one for the higher orders.
Correlation lengths follow the imaging geometry: the isoplanatic patch
projected to object-plane pixels sets the high-order length, tilts decay
three times slower.

Synthesis filters independent white-noise channels on a padded periodic
grid (circulant embedding), crops, then mixes channels pointwise with the
Cholesky factor of the modal matrix.  Piston is never sampled; its channel
is identically zero.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from turbsim import rng
from turbsim.optics import (
    N_MODES,
    ModalCovariance,
    TurbulenceProtocol,
    fried_parameter,
    isoplanatic_angle,
    noll_covariance,
)

__all__ = [
    "FieldAutocorrelation",
    "WhiteNoiseSeed",
    "ZernikeField",
    "FieldStatistics",
    "build_autocorrelation",
    "synthesis_shape",
    "expand_white_noise",
    "sample_field",
    "field_statistics",
]

TILT_LENGTH_FACTOR = 3.0


@dataclass(frozen=True)
class WhiteNoiseSeed:
    """Seed plus the pinned generator algorithm for the noise expansion."""

    seed: int
    generator_id: str = rng.GENERATOR_ID

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.generator_id != rng.GENERATOR_ID:
            raise ValueError(
                f"unknown generator_id {self.generator_id!r}; "
                f"this build expands {rng.GENERATOR_ID!r}")


def _as_seed(seed) -> WhiteNoiseSeed:
    if isinstance(seed, WhiteNoiseSeed):
        return seed
    return WhiteNoiseSeed(seed=int(seed))


@dataclass(frozen=True)
class FieldAutocorrelation:
    """Separable covariance model for one protocol.

    ``degenerate`` marks the no-turbulence limit (cn2 = 0): no modal
    matrix, sampling returns the zero field.
    """

    modal: ModalCovariance | None
    ho_corr_len_px: float
    tilt_corr_len_px: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.degenerate:
            return
        if self.modal is None:
            raise ValueError("non-degenerate autocorrelation requires modal matrix")
        if not self.ho_corr_len_px >= 1.0:
            raise ValueError("ho_corr_len_px must be >= 1")
        if not self.tilt_corr_len_px >= self.ho_corr_len_px:
            raise ValueError("tilt correlation cannot be shorter than high-order")

    def high_order_kernel(self, lag) -> np.ndarray:
        """Normalized squared-exponential correlation at pixel lag."""
        d = np.asarray(lag, dtype=np.float64)
        return np.exp(-(d * d) / (2.0 * self.ho_corr_len_px**2))

    def tilt_kernel(self, lag) -> np.ndarray:
        d = np.asarray(lag, dtype=np.float64)
        return np.exp(-(d * d) / (2.0 * self.tilt_corr_len_px**2))


@dataclass
class ZernikeField:
    """Per-pixel Noll coefficients with full sampling provenance.

    ``data[y, x, j-1]`` is the coefficient of Noll mode ``j`` in phase
    radians.  The piston plane ``data[..., 0]`` is identically zero.
    """

    data: np.ndarray
    protocol: TurbulenceProtocol
    seed: WhiteNoiseSeed

    def __post_init__(self) -> None:
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 3 or d.shape[2] != N_MODES:
            raise ValueError(f"field data must be (H, W, {N_MODES}), got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("field data must be finite")
        if np.any(d[..., 0] != 0.0):
            raise ValueError("piston channel must be zero")
        self.data = d

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]


def build_autocorrelation(p: TurbulenceProtocol) -> FieldAutocorrelation:
    """Derive the separable covariance model from geometry and turbulence.

    The high-order correlation length is the isoplanatic patch size on the
    object plane, theta0 * L, in units of the object-plane pixel pitch;
    the tilt length is three times that.  Both are clamped to
    [1, max(H, W)] pixels so the synthesis grid stays well conditioned.
    """
    if p.cn2 == 0.0:
        return FieldAutocorrelation(modal=None, ho_corr_len_px=1.0,
                                    tilt_corr_len_px=1.0, degenerate=True)
    d_over_r0 = p.aperture_m / fried_parameter(p)
    modal = noll_covariance(d_over_r0)
    patch_m = isoplanatic_angle(p) * p.distance_m
    raw_len = patch_m / p.pixel_pitch_object_m
    hi = float(max(p.image_width_px, p.image_height_px))
    ho_len = float(min(max(raw_len, 1.0), hi))
    tilt_len = float(min(max(TILT_LENGTH_FACTOR * raw_len, 1.0), hi))
    return FieldAutocorrelation(modal=modal, ho_corr_len_px=ho_len,
                                tilt_corr_len_px=tilt_len)


def synthesis_shape(ac: FieldAutocorrelation,
                    p: TurbulenceProtocol) -> tuple[int, int]:
    """Padded grid on which white noise is drawn and filtered.

    Two tilt correlation lengths of padding on each side decouple opposite
    edges of the crop from the periodic wrap-around of the embedding.
    """
    pad = int(math.ceil(2.0 * ac.tilt_corr_len_px))
    return p.image_height_px + 2 * pad, p.image_width_px + 2 * pad


def expand_white_noise(seed, height: int, width: int) -> np.ndarray:
    """Deterministic (height, width, 36) standard-normal tensor.

    Channel j-1 feeds Noll mode j and is keyed by (seed, mode) so the
    expansion is reproducible regardless of how many channels or pixels
    any other consumer drew.  The piston channel is left at zero.
    """
    s = _as_seed(seed)
    out = np.zeros((height, width, N_MODES), dtype=np.float64)
    n = height * width
    for mode in range(2, N_MODES + 1):
        stream = rng.stream_id(rng.DOMAIN_FIELD, mode)
        out[:, :, mode - 1] = rng.normals(s.seed, stream, n).reshape(height, width)
    return out


_filter_cache: dict[tuple[int, int, float], np.ndarray] = {}
_filter_lock = threading.Lock()


def _periodic_gaussian(n: int, corr_len: float) -> np.ndarray:
    """1D squared-exponential kernel periodized onto an n-torus.

    Periodic summation keeps the DFT nonnegative (it folds the positive
    continuous spectrum), unlike evaluating the kernel at the bare torus
    distance, which kinks at the antipode and leaks negative energy when
    corr_len is an appreciable fraction of n.
    """
    u = np.arange(n, dtype=np.float64)
    acc = np.zeros(n)
    for m in range(-3, 4):
        acc += np.exp(-((u + m * n) ** 2) / (2.0 * corr_len**2))
    return acc


def _torus_kernel(shape: tuple[int, int], corr_len: float) -> np.ndarray:
    ky = _periodic_gaussian(shape[0], corr_len)
    kx = _periodic_gaussian(shape[1], corr_len)
    k = np.outer(ky, kx)
    return k / k[0, 0]  # unit variance at zero lag


def _spectral_filter(shape: tuple[int, int], corr_len: float) -> np.ndarray:
    """sqrt of the DFT of the periodized correlation kernel.

    Filtering unit white noise with this and inverting the transform
    yields a unit-variance field whose circular autocorrelation equals
    the kernel.  Roundoff-scale negative spectral values are clipped.
    """
    key = (shape[0], shape[1], float(corr_len))
    with _filter_lock:
        hit = _filter_cache.get(key)
    if hit is not None:
        return hit
    spec = sfft.rfft2(_torus_kernel(shape, corr_len)).real
    np.clip(spec, 0.0, None, out=spec)
    filt = np.sqrt(spec)
    with _filter_lock:
        if len(_filter_cache) < 64:
            _filter_cache[key] = filt
    return filt


def kernel_spectrum_min(shape: tuple[int, int], corr_len: float) -> float:
    """Smallest DFT coefficient of the torus kernel, before clipping."""
    return float(sfft.rfft2(_torus_kernel(shape, corr_len)).real.min())


_chol_cache: dict[int, np.ndarray] = {}
_chol_lock = threading.Lock()


def _modal_cholesky(modal: ModalCovariance) -> np.ndarray:
    """Lower Cholesky factor of the modal matrix over modes 2..36.

    Cached for the unit strength and rescaled, mirroring the exact
    (D/r0)^(5/6) scaling of the matrix square root.
    """
    with _chol_lock:
        unit = _chol_cache.get(0)
        if unit is None:
            unit_mat = noll_covariance(1.0).restricted(2, N_MODES)
            unit = np.linalg.cholesky(unit_mat)
            _chol_cache[0] = unit
    return unit * modal.d_over_r0 ** (5.0 / 6.0)


def sample_field(ac: FieldAutocorrelation, p: TurbulenceProtocol, seed,
                 noise: np.ndarray | None = None) -> ZernikeField:
    """Draw one coefficient field for the protocol raster.

    ``noise`` overrides the seed expansion with an explicit white-noise
    tensor of shape ``synthesis_shape(ac, p) + (36,)``; it exists for
    linearity and zero-noise validation and must match that shape exactly.
    Sampling is a pure function of (ac, p, seed/noise): repeated calls
    return bit-identical fields regardless of thread count.
    """
    s = _as_seed(seed)
    h, w = p.image_height_px, p.image_width_px
    if ac.degenerate:
        return ZernikeField(data=np.zeros((h, w, N_MODES)), protocol=p, seed=s)
    hp, wp = synthesis_shape(ac, p)
    if noise is None:
        noise = expand_white_noise(s, hp, wp)
    else:
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != (hp, wp, N_MODES):
            raise ValueError(
                f"noise override must have shape {(hp, wp, N_MODES)}, "
                f"got {noise.shape}")
    pad_y = (hp - h) // 2
    pad_x = (wp - w) // 2

    filt_tilt = _spectral_filter((hp, wp), ac.tilt_corr_len_px)
    filt_ho = _spectral_filter((hp, wp), ac.ho_corr_len_px)

    # Channels in mode order 2..36; tilt kernel for modes 2 and 3.
    eps = np.moveaxis(noise[:, :, 1:], 2, 0)          # (35, hp, wp)
    spec = sfft.rfft2(eps, axes=(1, 2))
    spec[:2] *= filt_tilt[None]
    spec[2:] *= filt_ho[None]
    planes = sfft.irfft2(spec, s=(hp, wp), axes=(1, 2))
    planes = planes[:, pad_y:pad_y + h, pad_x:pad_x + w]

    chol = _modal_cholesky(ac.modal)                  # (35, 35) lower
    mixed = np.einsum("ij,jhw->hwi", chol, planes, optimize=True)
    data = np.zeros((h, w, N_MODES), dtype=np.float64)
    data[:, :, 1:] = mixed
    return ZernikeField(data=data, protocol=p, seed=s)


@dataclass
class FieldStatistics:
    """Monte-Carlo validation summary for a stack of sampled fields."""

    n_samples: int
    modal_empirical: np.ndarray
    modal_expected: np.ndarray
    modal_rel_frobenius: float
    tilt_variance: float
    tilt_variance_expected: float
    autocorr_lags: np.ndarray
    autocorr_channel4: np.ndarray
    autocorr_expected: np.ndarray
    autocorr_max_abs_err: float
    quadrant_variances: np.ndarray
    quadrant_drift: float

    def summary(self) -> str:
        lines = [
            f"samples = {self.n_samples}",
            f"modal_rel_frobenius = {self.modal_rel_frobenius:.6g}",
            f"tilt_variance = {self.tilt_variance:.6g}",
            f"tilt_variance_expected = {self.tilt_variance_expected:.6g}",
            f"autocorr_max_abs_err = {self.autocorr_max_abs_err:.6g}",
            f"quadrant_drift = {self.quadrant_drift:.6g}",
        ]
        return "\n".join(lines)


def field_statistics(fields, ac: FieldAutocorrelation) -> FieldStatistics:
    """Empirical moments of sampled fields against the declared model.

    ``fields`` is a sequence of :class:`ZernikeField` or a stacked array
    of shape (N, H, W, 36).  The empirical modal covariance uses raw
    second moments (the model mean is zero by construction); the spatial
    autocorrelation is estimated for channel 4 along both axes out to
    three high-order correlation lengths; quadrant variances aggregate
    all non-piston channels.
    """
    if ac.degenerate or ac.modal is None:
        raise ValueError("statistics require a non-degenerate model")
    if isinstance(fields, np.ndarray):
        stack = np.asarray(fields, dtype=np.float64)
    else:
        stack = np.stack([f.data for f in fields])
    if stack.ndim != 4 or stack.shape[3] != N_MODES:
        raise ValueError(f"expected (N, H, W, {N_MODES}), got {stack.shape}")
    n, h, w, _ = stack.shape

    flat = stack.reshape(n * h * w, N_MODES)
    modal_emp = (flat.T @ flat) / flat.shape[0]
    expected = ac.modal.matrix
    denom = np.linalg.norm(expected)
    rel_f = float(np.linalg.norm(modal_emp - expected) / denom)

    # Channel-4 spatial autocorrelation along x and y, averaged.
    c4 = stack[:, :, :, 3]
    var4 = float((c4 * c4).mean())
    max_lag = int(min(round(3.0 * ac.ho_corr_len_px), min(h, w) - 1))
    lags = np.arange(max_lag + 1)
    emp = np.empty(max_lag + 1)
    for d in lags:
        if d == 0:
            emp[0] = 1.0
            continue
        px = (c4[:, :, :-d] * c4[:, :, d:]).mean()
        py = (c4[:, :-d, :] * c4[:, d:, :]).mean()
        emp[d] = 0.5 * (px + py) / var4
    model = ac.high_order_kernel(lags)
    ac_err = float(np.abs(emp - model).max())

    # Total (all-channel) variance per raster quadrant.
    hy, hx = h // 2, w // 2
    quads = [stack[:, :hy, :hx], stack[:, :hy, hx:],
             stack[:, hy:, :hx], stack[:, hy:, hx:]]
    qvar = np.array([float((q * q).sum(axis=3).mean()) for q in quads])
    drift = float((qvar.max() - qvar.min()) / qvar.mean())

    return FieldStatistics(
        n_samples=n,
        modal_empirical=modal_emp,
        modal_expected=expected,
        modal_rel_frobenius=rel_f,
        tilt_variance=float(modal_emp[1, 1]),
        tilt_variance_expected=float(expected[1, 1]),
        autocorr_lags=lags,
        autocorr_channel4=emp,
        autocorr_expected=model,
        autocorr_max_abs_err=ac_err,
        quadrant_variances=qvar,
        quadrant_drift=drift,
    )
