"""PSF rendering, low-rank PSF basis, and the phase-to-space surrogate.

A point-spread function for one pixel follows from the local Zernike
coefficients: the pupil field is the aperture times ``exp(i phase)``, and
the intensity PSF is the squared magnitude of its Fraunhofer transform,
sampled at the protocol's object-plane pixel pitch.  Rendering uses a
semianalytic matrix DFT: an explicit complex exponential matrix maps the
pupil raster straight onto a finely oversampled patch of the image plane,
which is then box-integrated down to the s x s kernel raster.  This gives
exact pixel alignment (odd kernels, center sample at the optical axis) at
any pitch without resampling heuristics.

The degradation operator never renders per pixel.  A fixed orthonormal
basis of ``k`` kernels is learned once by uncentered PCA over PSFs drawn
from the modal statistics across a D/r0 range, and a quadratic-feature
ridge surrogate maps local coefficients ``a_4..a_36`` to basis weights.
Basis and surrogate persist together in one little-endian binary artifact
whose SHA-256 names the operator in dataset sidecars.
"""

from __future__ import annotations

import hashlib
import math
import struct
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from turbsim import rng
from turbsim.field import ZernikeField
from turbsim.optics import (
    N_MODES,
    TurbulenceProtocol,
    ZernikeSpec,
    noll_covariance,
    pupil_mask,
    zernike_raster,
)

__all__ = [
    "RenderGeometry",
    "PsfBasis",
    "P2sMap",
    "CoeffMaps",
    "FitQualityError",
    "ArtifactError",
    "render_psf_exact",
    "render_psf_batch",
    "build_psf_basis",
    "project_coeffs_exact",
    "fit_p2s_surrogate",
    "p2s_eval",
    "coeff_energy_map",
    "save_artifact",
    "load_artifact",
    "artifact_hash",
]

HIGH_ORDER_MODES = N_MODES - 3          # a_4 .. a_36
N_FEATURES = 2 * HIGH_ORDER_MODES       # [a, a^2]
SURROGATE_ERROR_LIMIT = 0.10

ARTIFACT_MAGIC = b"TBPS"
ARTIFACT_VERSION = 1


class FitQualityError(ValueError):
    """Surrogate failed its held-out reconstruction-error contract."""

    def __init__(self, message: str, median_error: float):
        super().__init__(message)
        self.median_error = median_error


class ArtifactError(ValueError):
    """Artifact file is malformed, wrong version, or fails its checks."""


@dataclass(frozen=True)
class RenderGeometry:
    """The four scalars that fix PSF rendering for a protocol."""

    wavelength_m: float
    aperture_m: float
    distance_m: float
    pixel_pitch_object_m: float

    def __post_init__(self) -> None:
        for name in ("wavelength_m", "aperture_m", "distance_m",
                     "pixel_pitch_object_m"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")

    @classmethod
    def from_protocol(cls, p: TurbulenceProtocol) -> "RenderGeometry":
        return cls(wavelength_m=p.wavelength_m, aperture_m=p.aperture_m,
                   distance_m=p.distance_m,
                   pixel_pitch_object_m=p.pixel_pitch_object_m)


def _as_geometry(p) -> RenderGeometry:
    if isinstance(p, RenderGeometry):
        return p
    if isinstance(p, TurbulenceProtocol):
        return RenderGeometry.from_protocol(p)
    raise TypeError(f"expected TurbulenceProtocol or RenderGeometry, got {type(p)!r}")


# ---------------------------------------------------------------------------
# Exact rendering


_dft_cache: dict[tuple, np.ndarray] = {}
_phase_cache: dict[int, np.ndarray] = {}
_render_lock = threading.Lock()


def _dft_matrix(geom: RenderGeometry, s: int, oversample: int,
                pupil_n: int) -> np.ndarray:
    key = (geom, s, oversample, pupil_n)
    with _render_lock:
        hit = _dft_cache.get(key)
    if hit is not None:
        return hit
    m = s * oversample
    du = geom.aperture_m / pupil_n
    u = ((np.arange(pupil_n) + 0.5) - pupil_n / 2.0) * du
    dx = geom.pixel_pitch_object_m / oversample
    x = (np.arange(m) - (m - 1) / 2.0) * dx
    lam_l = geom.wavelength_m * geom.distance_m
    # Alias-free field of view of the pupil sampling: adjacent pupil
    # samples must advance the transform kernel phase by at most pi.
    x_max = abs(x).max() + 0.5 * dx
    if 2.0 * du * x_max / lam_l > 1.0:
        raise ValueError(
            f"kernel raster (s={s}) exceeds the alias-free field of view of "
            f"the {pupil_n}-point pupil transform for this geometry")
    a = np.exp(-2j * math.pi / lam_l * np.outer(x, u))
    with _render_lock:
        if len(_dft_cache) < 32:
            _dft_cache[key] = a
    return a


def _phase_stack(spec: ZernikeSpec) -> np.ndarray:
    """Rasters of modes 4..36, shape (33, n, n)."""
    key = spec.pupil_grid_n
    with _render_lock:
        hit = _phase_cache.get(key)
    if hit is not None:
        return hit
    stack = np.stack([zernike_raster(i, spec) for i in range(4, N_MODES + 1)])
    with _render_lock:
        _phase_cache[key] = stack
    return stack


def render_psf_batch(coeffs: np.ndarray, p, s: int = 33,
                     spec: ZernikeSpec | None = None,
                     oversample: int = 3) -> np.ndarray:
    """Render one unit-sum s x s PSF per row of high-order coefficients.

    ``coeffs`` has shape (B, 33) holding Noll modes 4..36 in phase
    radians.  Tilt and piston never enter a kernel: tilt is handled by the
    warp operator and piston is irrelevant to intensity.
    """
    spec = spec or ZernikeSpec()
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
    if coeffs.ndim != 2 or coeffs.shape[1] != HIGH_ORDER_MODES:
        raise ValueError(f"coeffs must be (B, {HIGH_ORDER_MODES}), got {coeffs.shape}")
    if s < 3 or s % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 3, got {s}")
    if oversample < 1 or oversample % 2 == 0:
        raise ValueError(f"oversample must be odd and >= 1, got {oversample}")
    geom = _as_geometry(p)
    n = spec.pupil_grid_n
    a_mat = _dft_matrix(geom, s, oversample, n)
    mask = pupil_mask(spec)
    zstack = _phase_stack(spec)

    b = coeffs.shape[0]
    m = s * oversample
    out = np.empty((b, s, s), dtype=np.float64)
    chunk = max(1, int(64 * 256**2 / n**2))
    for lo in range(0, b, chunk):
        hi = min(b, lo + chunk)
        phase = np.tensordot(coeffs[lo:hi], zstack, axes=(1, 0))
        pupil = mask * np.exp(1j * phase)
        t1 = pupil @ a_mat.T          # (b, n, m)
        e = a_mat @ t1                # broadcast: (b, m, m)
        psf = (e.real**2 + e.imag**2)
        binned = psf.reshape(hi - lo, s, oversample, s, oversample).sum(axis=(2, 4))
        binned /= binned.sum(axis=(1, 2), keepdims=True)
        out[lo:hi] = binned
    return out


def render_psf_exact(coeffs: np.ndarray, p, s: int = 33,
                     spec: ZernikeSpec | None = None,
                     oversample: int = 3) -> np.ndarray:
    """Single exact PSF for one 33-vector of high-order coefficients."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (HIGH_ORDER_MODES,):
        raise ValueError(f"coeffs must have shape ({HIGH_ORDER_MODES},), "
                         f"got {coeffs.shape}")
    return render_psf_batch(coeffs[None], p, s=s, spec=spec,
                            oversample=oversample)[0]


# ---------------------------------------------------------------------------
# Basis


@dataclass
class PsfBasis:
    """Orthonormal kernel basis with its training provenance.

    ``kernels[k]`` is the k-th s x s basis kernel (flattened vectors are
    orthonormal).  ``energy_fractions`` is the nonincreasing share of
    training energy captured per component.  ``geometry`` is the rendering
    geometry the basis (and every exact projection against it) uses.
    """

    kernels: np.ndarray
    energy_fractions: np.ndarray
    dr0_range: tuple[float, float]
    geometry: RenderGeometry
    pupil_grid_n: int
    oversample: int
    n_build_samples: int
    build_seed: int

    def __post_init__(self) -> None:
        k = np.asarray(self.kernels, dtype=np.float64)
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ValueError(f"kernels must be (K, s, s), got {k.shape}")
        e = np.asarray(self.energy_fractions, dtype=np.float64)
        if e.shape != (k.shape[0],):
            raise ValueError("energy_fractions length must match kernel count")
        if np.any(np.diff(e) > 1e-12):
            raise ValueError("energy_fractions must be nonincreasing")
        lo, hi = self.dr0_range
        if not (0 < lo < hi):
            raise ValueError(f"invalid dr0_range {self.dr0_range!r}")
        self.kernels = k
        self.energy_fractions = e
        self.dr0_range = (float(lo), float(hi))

    @property
    def k(self) -> int:
        return self.kernels.shape[0]

    @property
    def s(self) -> int:
        return self.kernels.shape[1]

    def matrix(self) -> np.ndarray:
        """Kernels flattened to a (K, s*s) matrix."""
        return self.kernels.reshape(self.k, -1)

    def kernel_sums(self) -> np.ndarray:
        return self.kernels.sum(axis=(1, 2))


def _sample_ho_coeffs(seed: int, n: int, dr0_range: tuple[float, float],
                      domain: int) -> np.ndarray:
    """n draws of modes 4..36 at strengths uniform over dr0_range."""
    lo, hi = dr0_range
    unit = noll_covariance(1.0).restricted(4, N_MODES)
    chol = np.linalg.cholesky(unit)
    d = lo + (hi - lo) * rng.uniforms(seed, rng.stream_id(domain, 0), n)
    z = rng.normals(seed, rng.stream_id(domain, 1),
                    n * HIGH_ORDER_MODES).reshape(n, HIGH_ORDER_MODES)
    scale = d ** (5.0 / 6.0)
    return (z @ chol.T) * scale[:, None]


def build_psf_basis(p, dr0_range: tuple[float, float] = (0.05, 4.0),
                    n_samples: int = 20_000, k: int = 100, s: int = 33,
                    seed: int = 0, spec: ZernikeSpec | None = None,
                    oversample: int = 3) -> PsfBasis:
    """Learn an orthonormal PSF basis by uncentered PCA.

    High-order coefficient vectors are drawn from the Kolmogorov modal
    covariance at strengths uniform over ``dr0_range``, rendered exactly
    at the geometry of ``p``, and the top-k right singular directions of
    the (n_samples, s*s) stack become the kernels.  Uncentered PCA keeps
    the diffraction-limited kernel inside the span.
    """
    spec = spec or ZernikeSpec()
    geom = _as_geometry(p)
    lo, hi = float(dr0_range[0]), float(dr0_range[1])
    if not (0 < lo < hi):
        raise ValueError(f"invalid dr0_range {dr0_range!r}")
    if k < 1 or k > s * s:
        raise ValueError(f"component count {k} outside 1..{s * s}")
    if n_samples < 2 * k:
        raise ValueError(f"n_samples={n_samples} too small for k={k}")

    coeffs = _sample_ho_coeffs(seed, n_samples, (lo, hi), rng.DOMAIN_BASIS)
    psfs = render_psf_batch(coeffs, geom, s=s, spec=spec,
                            oversample=oversample)
    x = psfs.reshape(n_samples, s * s)
    gram = x.T @ x
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    total = float(evals.sum())
    fractions = evals[:k] / total
    kernels = evecs[:, :k].T.reshape(k, s, s).copy()
    # Deterministic sign: the largest-magnitude entry of each kernel is
    # positive.
    flat = kernels.reshape(k, -1)
    idx = np.argmax(np.abs(flat), axis=1)
    signs = np.sign(flat[np.arange(k), idx])
    signs[signs == 0] = 1.0
    kernels *= signs[:, None, None]

    return PsfBasis(kernels=kernels, energy_fractions=fractions,
                    dr0_range=(lo, hi), geometry=geom,
                    pupil_grid_n=spec.pupil_grid_n, oversample=oversample,
                    n_build_samples=n_samples, build_seed=int(seed))


def project_coeffs_exact(basis: PsfBasis, psf: np.ndarray) -> np.ndarray:
    """Least-squares weights of a PSF in the basis (orthonormal projection)."""
    psf = np.asarray(psf, dtype=np.float64)
    if psf.shape != (basis.s, basis.s):
        raise ValueError(f"psf must be {(basis.s, basis.s)}, got {psf.shape}")
    return basis.matrix() @ psf.ravel()


# ---------------------------------------------------------------------------
# Surrogate


@dataclass
class P2sMap:
    """Quadratic-feature ridge map from a_4..a_36 to basis weights.

    ``coef`` has shape (1 + 66, K): a constant row followed by weights
    for the features [a_4..a_36, a_4^2..a_36^2].  The constant row is not
    a fitted intercept: it is pinned to the exact projection of the
    diffraction-limited kernel, so zero aberration reproduces the
    unaberrated system response instead of a regression artifact.
    ``heldout_median_error`` is the median relative L2 kernel
    reconstruction error measured on held-out samples at fit time; it is
    persisted and re-checked on load.
    """

    coef: np.ndarray
    training_dr0_range: tuple[float, float]
    heldout_median_error: float
    alpha: float
    fit_seed: int

    def __post_init__(self) -> None:
        c = np.asarray(self.coef, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != N_FEATURES + 1:
            raise ValueError(f"coef must be ({N_FEATURES + 1}, K), got {c.shape}")
        self.coef = c
        lo, hi = self.training_dr0_range
        self.training_dr0_range = (float(lo), float(hi))

    @property
    def k(self) -> int:
        return self.coef.shape[1]


def _features(a: np.ndarray) -> np.ndarray:
    """[a, a^2] feature rows for (N, 33) coefficient rows."""
    return np.concatenate([a, a * a], axis=-1)


def fit_p2s_surrogate(basis: PsfBasis,
                      dr0_range: tuple[float, float] | None = None,
                      n_train: int = 8_000, n_heldout: int = 1_000,
                      seed: int = 1, alpha: float = 1e-6) -> P2sMap:
    """Fit the coefficient-to-weights surrogate against exact projections.

    Fresh coefficient draws (independent of the basis build stream) are
    rendered exactly and projected onto the basis; ridge regression on
    quadratic features fits the offsets from the pinned zero-aberration
    projection.  Raises :class:`FitQualityError` if the held-out median
    relative kernel reconstruction error exceeds 0.10.
    """
    from sklearn.linear_model import Ridge

    rng_range = basis.dr0_range if dr0_range is None else (
        float(dr0_range[0]), float(dr0_range[1]))
    spec = ZernikeSpec(pupil_grid_n=basis.pupil_grid_n)
    n_total = n_train + n_heldout
    coeffs = _sample_ho_coeffs(seed, n_total, rng_range, rng.DOMAIN_SURROGATE)
    psfs = render_psf_batch(coeffs, basis.geometry, s=basis.s, spec=spec,
                            oversample=basis.oversample)
    x = psfs.reshape(n_total, -1)
    beta = x @ basis.matrix().T          # exact projections (N, K)

    diffraction = render_psf_exact(np.zeros(HIGH_ORDER_MODES), basis.geometry,
                                   s=basis.s, spec=spec,
                                   oversample=basis.oversample)
    beta0 = basis.matrix() @ diffraction.ravel()
    feats = _features(coeffs)
    model = Ridge(alpha=alpha, fit_intercept=False)
    model.fit(feats[:n_train], beta[:n_train] - beta0)
    coef = np.vstack([beta0[None, :], model.coef_.T])

    pred = feats[n_train:] @ coef[1:] + coef[0]
    recon = pred @ basis.matrix()
    err = np.linalg.norm(recon - x[n_train:], axis=1)
    norm = np.linalg.norm(x[n_train:], axis=1)
    median_err = float(np.median(err / norm))
    if median_err > SURROGATE_ERROR_LIMIT:
        raise FitQualityError(
            f"surrogate held-out median relative error {median_err:.4f} "
            f"exceeds {SURROGATE_ERROR_LIMIT}", median_err)
    return P2sMap(coef=coef, training_dr0_range=rng_range,
                  heldout_median_error=median_err, alpha=float(alpha),
                  fit_seed=int(seed))


# ---------------------------------------------------------------------------
# Evaluation on fields


@dataclass
class CoeffMaps:
    """Per-pixel basis weights for one sampled field."""

    beta: np.ndarray                 # (H, W, K)
    mode: str                        # "surrogate" or "exact"
    d_over_r0: float

    def __post_init__(self) -> None:
        b = np.asarray(self.beta, dtype=np.float64)
        if b.ndim != 3:
            raise ValueError(f"beta must be (H, W, K), got {b.shape}")
        self.beta = b


def p2s_eval(p2s: P2sMap, basis: PsfBasis, field: ZernikeField,
             mode: str = "surrogate") -> CoeffMaps:
    """Evaluate per-pixel basis weights for a coefficient field.

    ``mode="surrogate"`` applies the fitted quadratic map (fast path used
    by the simulator).  ``mode="exact"`` renders and projects every pixel
    at the basis geometry; it is the validation oracle and is quadratic
    in raster area, so keep it to small rasters.  A field whose protocol
    strength lies outside the surrogate's training range triggers a
    warning, not an error.
    """
    if p2s.k != basis.k:
        raise ValueError("surrogate and basis disagree on component count")
    d = field.protocol.d_over_r0()
    lo, hi = p2s.training_dr0_range
    if d > 0 and (d < lo * (1 - 1e-9) or d > hi * (1 + 1e-9)):
        warnings.warn(
            f"field strength D/r0 = {d:.3g} outside surrogate training "
            f"range [{lo:.3g}, {hi:.3g}]", stacklevel=2)
    h, w = field.shape
    a = field.data[:, :, 3:]
    if mode == "surrogate":
        feats = _features(a.reshape(h * w, HIGH_ORDER_MODES))
        beta = feats @ p2s.coef[1:] + p2s.coef[0]
        return CoeffMaps(beta=beta.reshape(h, w, p2s.k), mode=mode,
                         d_over_r0=d)
    if mode == "exact":
        spec = ZernikeSpec(pupil_grid_n=basis.pupil_grid_n)
        psfs = render_psf_batch(a.reshape(h * w, HIGH_ORDER_MODES),
                                basis.geometry, s=basis.s, spec=spec,
                                oversample=basis.oversample)
        beta = psfs.reshape(h * w, -1) @ basis.matrix().T
        return CoeffMaps(beta=beta.reshape(h, w, basis.k), mode=mode,
                         d_over_r0=d)
    raise ValueError(f"unknown mode {mode!r}")


def coeff_energy_map(maps: CoeffMaps, basis: PsfBasis) -> np.ndarray:
    """Per-pixel sum of the reconstructed kernel (should hover near 1)."""
    return maps.beta @ basis.kernel_sums()


# ---------------------------------------------------------------------------
# Artifact persistence


_FLAG_SURROGATE = 1


def save_artifact(path, basis: PsfBasis, p2s: P2sMap | None = None) -> None:
    """Write basis (and optional surrogate) to one binary artifact file.

    Layout (little-endian): magic "TBPS", u32 version, u32 flags, then
    u32 k, s, pupil_n, oversample; f64 dr0 range (2), geometry (4);
    u32 n_build_samples, u64 build_seed; f32 energy fractions [k];
    f32 kernels [k*s*s].  If flags bit 0 is set a surrogate section
    follows: u32 n_features, f64 training range (2), f64 held-out median
    error, f64 alpha, u64 fit_seed, f32 coef [(n_features+1)*k].
    """
    flags = _FLAG_SURROGATE if p2s is not None else 0
    if p2s is not None and p2s.k != basis.k:
        raise ValueError("surrogate and basis disagree on component count")
    geom = basis.geometry
    head = bytearray()
    head += ARTIFACT_MAGIC
    head += struct.pack("<II", ARTIFACT_VERSION, flags)
    head += struct.pack("<IIII", basis.k, basis.s, basis.pupil_grid_n,
                        basis.oversample)
    head += struct.pack("<dd", *basis.dr0_range)
    head += struct.pack("<dddd", geom.wavelength_m, geom.aperture_m,
                        geom.distance_m, geom.pixel_pitch_object_m)
    head += struct.pack("<IQ", basis.n_build_samples, basis.build_seed)
    body = bytearray()
    body += basis.energy_fractions.astype("<f4").tobytes()
    body += basis.kernels.astype("<f4").tobytes()
    if p2s is not None:
        body += struct.pack("<I", N_FEATURES)
        body += struct.pack("<dd", *p2s.training_dr0_range)
        body += struct.pack("<dd", p2s.heldout_median_error, p2s.alpha)
        body += struct.pack("<Q", p2s.fit_seed)
        body += p2s.coef.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(head) + bytes(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ArtifactError("artifact truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_artifact(path) -> tuple[PsfBasis, P2sMap | None]:
    """Read an artifact file; verifies magic, version and stored checks."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    if r.take(4) != ARTIFACT_MAGIC:
        raise ArtifactError(f"not a PSF-basis artifact: {path}")
    version, flags = r.unpack("<II")
    if version != ARTIFACT_VERSION:
        raise ArtifactError(
            f"artifact version {version} unsupported (expected {ARTIFACT_VERSION})")
    k, s, pupil_n, oversample = r.unpack("<IIII")
    dr0 = r.unpack("<dd")
    wl, ap, dist, pitch = r.unpack("<dddd")
    n_build, build_seed = r.unpack("<IQ")
    fractions = np.frombuffer(r.take(4 * k), dtype="<f4").astype(np.float64)
    kernels = np.frombuffer(r.take(4 * k * s * s), dtype="<f4").astype(
        np.float64).reshape(k, s, s)
    # f32 storage can leave microscopic increases between neighbouring
    # fractions; renormalize the ordering guard, not the values.
    fractions = np.minimum.accumulate(np.maximum(fractions, 0.0))
    basis = PsfBasis(kernels=kernels, energy_fractions=fractions,
                     dr0_range=dr0,
                     geometry=RenderGeometry(wavelength_m=wl, aperture_m=ap,
                                             distance_m=dist,
                                             pixel_pitch_object_m=pitch),
                     pupil_grid_n=pupil_n, oversample=oversample,
                     n_build_samples=n_build, build_seed=build_seed)
    p2s = None
    if flags & _FLAG_SURROGATE:
        (n_feat,) = r.unpack("<I")
        if n_feat != N_FEATURES:
            raise ArtifactError(f"surrogate feature count {n_feat} unsupported")
        tr = r.unpack("<dd")
        heldout, alpha = r.unpack("<dd")
        (fit_seed,) = r.unpack("<Q")
        coef = np.frombuffer(r.take(4 * (n_feat + 1) * k), dtype="<f4").astype(
            np.float64).reshape(n_feat + 1, k)
        if heldout > SURROGATE_ERROR_LIMIT:
            raise ArtifactError(
                f"stored surrogate held-out error {heldout:.4f} exceeds "
                f"{SURROGATE_ERROR_LIMIT}; refusing to load")
        p2s = P2sMap(coef=coef, training_dr0_range=tr,
                     heldout_median_error=heldout, alpha=alpha,
                     fit_seed=fit_seed)
    if r.pos != len(data):
        raise ArtifactError("trailing bytes after artifact payload")
    return basis, p2s


def artifact_hash(path) -> str:
    """SHA-256 hex digest of the artifact file bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
