"""Imaging geometry, Fried statistics and Zernike machinery.

Everything downstream (field sampling, PSF synthesis, degradation) is
driven by the quantities defined here: a :class:`TurbulenceProtocol`
describing one long-range imaging configuration, the Kolmogorov scalars
``r0`` and ``theta0`` for a constant-Cn2 horizontal path, the Noll-indexed
Zernike basis over the pupil, and the 36x36 modal covariance of the
Zernike expansion coefficients.

Conventions
-----------
* Zernike modes use Noll's indexing and normalization: unit mean-square
  over the unit disk, even indices carry cos(m*theta), odd indices
  sin(m*theta).  Mode 1 is piston, modes 2 and 3 are the x/y tilts.
* Coefficients are in radians of phase at the protocol wavelength.
* The Fried parameter uses the spherical-wave path weighting
  ``(z/L)^(5/3)``; a zero Cn2 yields ``r0 = inf`` which all callers treat
  as the no-turbulence limit.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy import integrate
from scipy.special import jv

__all__ = [
    "TurbulenceProtocol",
    "ZernikeSpec",
    "ModalCovariance",
    "noll_to_nm",
    "fried_parameter",
    "isoplanatic_angle",
    "zernike_eval",
    "zernike_raster",
    "pupil_mask",
    "noll_covariance",
    "tilt_pixel_scale",
]

N_MODES = 36

# Prefactor of the Kolmogorov modal covariance written as an integral over
# normalized wavenumber x (aperture diameter D scaled out):
#   cov(i,j) = K * (D/r0)^(5/3) * sign * sqrt((n+1)(n'+1))
#              * Integral_0^inf x^(-14/3) J_{n+1}(x) J_{n'+1}(x) dx
# K collects the Kolmogorov spectrum constant expressed through gamma
# functions; numerically 3.8777049889.
_KOLMOGOROV_PREFACTOR = (
    4.0 * (24.0 / 5.0 * math.gamma(6.0 / 5.0)) ** (5.0 / 6.0)
    * math.gamma(11.0 / 6.0) ** 2 / math.pi
)


@dataclass(frozen=True)
class TurbulenceProtocol:
    """One imaging configuration: geometry, optics, turbulence, sensor.

    All lengths are in meters, ``cn2`` in m^(-2/3).  ``noise_sigma`` is the
    standard deviation of the additive sensor noise on the [0, 1] intensity
    scale.  ``cn2 = 0`` is the valid no-turbulence limit; every other
    physical field must be strictly positive.
    """

    distance_m: float
    focal_length_m: float
    f_number: float
    scene_width_m: float
    cn2: float
    wavelength_m: float = 525e-9
    image_width_px: int = 256
    image_height_px: int = 256
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        for name in ("distance_m", "focal_length_m", "f_number",
                     "scene_width_m", "wavelength_m"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        if not (math.isfinite(self.cn2) and self.cn2 >= 0):
            raise ValueError(f"cn2 must be finite and nonnegative, got {self.cn2!r}")
        if self.f_number < 1.0:
            raise ValueError(f"f_number must be >= 1, got {self.f_number!r}")
        for name in ("image_width_px", "image_height_px"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 8):
                raise ValueError(f"{name} must be an integer >= 8, got {v!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")

    # -- derived geometry ------------------------------------------------

    @property
    def aperture_m(self) -> float:
        """Aperture diameter D = f / N."""
        return self.focal_length_m / self.f_number

    @property
    def wavenumber(self) -> float:
        """Optical wavenumber k = 2 pi / lambda, rad/m."""
        return 2.0 * math.pi / self.wavelength_m

    @property
    def pixel_pitch_object_m(self) -> float:
        """Size of one sensor pixel back-projected onto the object plane."""
        return self.scene_width_m / self.image_width_px

    @property
    def pixel_pitch_sensor_m(self) -> float:
        """Physical sensor pixel pitch implied by scene width and geometry."""
        return self.pixel_pitch_object_m * self.focal_length_m / self.distance_m

    def d_over_r0(self) -> float:
        """Turbulence strength D/r0; zero in the no-turbulence limit."""
        r0 = fried_parameter(self)
        if math.isinf(r0):
            return 0.0
        return self.aperture_m / r0

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        """Flat ``key = value`` text, one field per line, SI units."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                lines.append(f"{f.name} = {int(v)}")
            else:
                lines.append(f"{f.name} = {float(v):.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TurbulenceProtocol":
        """Parse the output of :meth:`to_text`.

        Unknown keys and missing required keys raise ``ValueError`` so a
        corrupted or mislabeled protocol file never half-loads.
        """
        known = {f.name: f for f in fields(cls)}
        seen: dict[str, float] = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"protocol line {ln}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ValueError(f"protocol line {ln}: unknown key {key!r}")
            if key in seen:
                raise ValueError(f"protocol line {ln}: duplicate key {key!r}")
            try:
                seen[key] = float(val.strip())
            except ValueError as exc:
                raise ValueError(f"protocol line {ln}: bad value for {key!r}") from exc
        missing = {"distance_m", "focal_length_m", "f_number",
                   "scene_width_m", "cn2"} - set(seen)
        if missing:
            raise ValueError(f"protocol missing required keys: {sorted(missing)}")
        kwargs = {name: (int(v) if name.endswith("_px") else v)
                  for name, v in seen.items()}
        return cls(**kwargs)

    def with_raster(self, width_px: int, height_px: int) -> "TurbulenceProtocol":
        return replace(self, image_width_px=width_px, image_height_px=height_px)


@dataclass(frozen=True)
class ZernikeSpec:
    """Zernike basis configuration: mode count, pupil raster, convention."""

    n_modes: int = N_MODES
    pupil_grid_n: int = 256
    normalization: str = "noll"

    def __post_init__(self) -> None:
        if not 1 <= self.n_modes <= 120:
            raise ValueError(f"n_modes out of range: {self.n_modes}")
        if self.pupil_grid_n < 16:
            raise ValueError(f"pupil_grid_n too small: {self.pupil_grid_n}")
        if self.normalization != "noll":
            raise ValueError(f"unsupported normalization {self.normalization!r}")


DEFAULT_ZERNIKE = ZernikeSpec()


def noll_to_nm(j: int) -> tuple[int, int]:
    """Map a Noll index j >= 1 to radial order n and signed azimuthal m.

    Negative m denotes the sine term, positive the cosine term, following
    the convention that even j carries cos and odd j carries sin.
    """
    if j < 1:
        raise ValueError(f"Noll index must be >= 1, got {j}")
    n = 0
    rem = j - 1
    while rem > n:
        n += 1
        rem -= n
    m_abs = (n % 2) + 2 * ((rem + ((n + 1) % 2)) // 2)
    if m_abs == 0:
        return n, 0
    return n, (m_abs if j % 2 == 0 else -m_abs)


def _radial_poly(n: int, m_abs: int, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho, dtype=np.float64)
    for s in range((n - m_abs) // 2 + 1):
        c = ((-1.0) ** s * math.factorial(n - s)
             / (math.factorial(s)
                * math.factorial((n + m_abs) // 2 - s)
                * math.factorial((n - m_abs) // 2 - s)))
        out += c * rho ** (n - 2 * s)
    return out


def zernike_eval(i: int, rho, theta, spec: ZernikeSpec = DEFAULT_ZERNIKE):
    """Noll-normalized Zernike Z_i at polar pupil coordinates.

    ``rho`` may exceed 1; values there are meaningless and callers mask
    them.  Normalization gives unit mean square over the unit disk.
    """
    if not 1 <= i <= spec.n_modes:
        raise ValueError(f"mode index {i} outside 1..{spec.n_modes}")
    rho = np.asarray(rho, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    n, m = noll_to_nm(i)
    m_abs = abs(m)
    radial = _radial_poly(n, m_abs, rho)
    if m == 0:
        return math.sqrt(n + 1.0) * radial
    norm = math.sqrt(2.0 * (n + 1.0))
    if m > 0:
        return norm * radial * np.cos(m_abs * theta)
    return norm * radial * np.sin(m_abs * theta)


def _pupil_coords(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Pixel centers, diameter spanning the full raster; even n keeps the
    # sample set symmetric about the axis with no sample exactly at 0.
    c = (2.0 * np.arange(n) - (n - 1.0)) / n
    x, y = np.meshgrid(c, c, indexing="xy")
    return x, y


def pupil_mask(spec: ZernikeSpec = DEFAULT_ZERNIKE) -> np.ndarray:
    """Boolean unit-disk mask on the spec's pupil raster."""
    x, y = _pupil_coords(spec.pupil_grid_n)
    return x * x + y * y <= 1.0


_raster_cache: dict[tuple[int, int], np.ndarray] = {}
_raster_lock = threading.Lock()


def zernike_raster(i: int, spec: ZernikeSpec = DEFAULT_ZERNIKE) -> np.ndarray:
    """Z_i sampled on the pupil raster, zeroed outside the unit disk."""
    key = (spec.pupil_grid_n, i)
    with _raster_lock:
        hit = _raster_cache.get(key)
    if hit is not None:
        return hit
    x, y = _pupil_coords(spec.pupil_grid_n)
    rho = np.hypot(x, y)
    theta = np.arctan2(y, x)
    z = zernike_eval(i, rho, theta, spec=spec)
    z = np.where(rho <= 1.0, z, 0.0)
    with _raster_lock:
        _raster_cache[key] = z
    return z


def fried_parameter(p: TurbulenceProtocol) -> float:
    """Spherical-wave Fried parameter r0 in meters; inf when cn2 = 0.

    Constant Cn2 along a path of length L gives
    ``r0 = [0.423 k^2 Cn2 L (3/8)]^(-3/5)``, the closed form of the path
    integral with spherical-wave weighting (z/L)^(5/3).
    """
    if p.cn2 == 0.0:
        return math.inf
    k = p.wavenumber
    arg = 0.423 * k * k * p.cn2 * p.distance_m * (3.0 / 8.0)
    return arg ** (-3.0 / 5.0)


def isoplanatic_angle(p: TurbulenceProtocol) -> float:
    """Isoplanatic angle theta0 in radians; inf when cn2 = 0.

    theta0 = [2.914 k^2 Integral Cn2(z) z^(5/3) dz]^(-3/5); for constant
    Cn2 the integral is (3/8) L^(8/3).
    """
    if p.cn2 == 0.0:
        return math.inf
    k = p.wavenumber
    arg = 2.914 * k * k * p.cn2 * (3.0 / 8.0) * p.distance_m ** (8.0 / 3.0)
    return arg ** (-3.0 / 5.0)


def tilt_pixel_scale(p: TurbulenceProtocol) -> float:
    """Sensor-pixel displacement per radian of Noll tilt coefficient.

    A tilt coefficient a on Z_2 (or Z_3) slopes the pupil phase by
    4a/(k D), which the lens maps to an image displacement of
    4 f a / (k D); dividing by the sensor pitch gives pixels per radian.
    """
    return (4.0 * p.focal_length_m
            / (p.wavenumber * p.aperture_m * p.pixel_pitch_sensor_m))


@dataclass(frozen=True)
class ModalCovariance:
    """Covariance of Noll coefficients a_1..a_36 at one turbulence strength.

    The piston row and column are identically zero: piston is irrelevant to
    imaging and its Kolmogorov variance diverges.  The matrix scales as
    (D/r0)^(5/3), is symmetric PSD, and an entry vanishes whenever the two
    modes differ in |m| or, for nonzero m, in trigonometric parity.
    """

    matrix: np.ndarray
    d_over_r0: float

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (N_MODES, N_MODES):
            raise ValueError(f"matrix must be {N_MODES}x{N_MODES}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def restricted(self, lo: int = 2, hi: int = N_MODES) -> np.ndarray:
        """Submatrix for Noll modes lo..hi inclusive."""
        return self.matrix[lo - 1:hi, lo - 1:hi]


def _bessel_moment(n1: int, n2: int) -> float:
    """Integral_0^inf x^(-14/3) J_{n1+1}(x) J_{n2+1}(x) dx by quadrature.

    The integrand envelope decays like x^(-17/3); truncating at x = 800
    leaves a tail below 1e-6 relative even for the smallest matrix entries
    used here (order 1e-7).
    """
    def f(x: float) -> float:
        return x ** (-14.0 / 3.0) * jv(n1 + 1, x) * jv(n2 + 1, x)

    total = 0.0
    for a, b in ((0.0, 30.0), (30.0, 100.0), (100.0, 300.0), (300.0, 800.0)):
        val, _ = integrate.quad(f, a, b, limit=800, epsabs=1e-15, epsrel=1e-10)
        total += val
    return total


def _unit_noll_matrix() -> np.ndarray:
    mat = np.zeros((N_MODES, N_MODES))
    nm = [noll_to_nm(j) for j in range(1, N_MODES + 1)]
    moments: dict[tuple[int, int], float] = {}
    for i in range(2, N_MODES + 1):
        n1, m1 = nm[i - 1]
        for j in range(i, N_MODES + 1):
            n2, m2 = nm[j - 1]
            if abs(m1) != abs(m2):
                continue
            # For m != 0 the sin and cos families are uncorrelated.
            if m1 != 0 and (i % 2) != (j % 2):
                continue
            key = (min(n1, n2), max(n1, n2))
            if key not in moments:
                moments[key] = _bessel_moment(*key)
            sign = (-1.0) ** ((n1 + n2 - 2 * abs(m1)) // 2)
            val = (_KOLMOGOROV_PREFACTOR * sign
                   * math.sqrt((n1 + 1.0) * (n2 + 1.0)) * moments[key])
            mat[i - 1, j - 1] = val
            mat[j - 1, i - 1] = val
    return mat


_unit_matrix_cache: np.ndarray | None = None
_scaled_cache: dict[float, ModalCovariance] = {}
_cov_lock = threading.Lock()


def noll_covariance(d_over_r0: float) -> ModalCovariance:
    """36x36 Kolmogorov covariance of Noll coefficients at given D/r0.

    Computed once by quadrature for the unit strength and rescaled by
    (D/r0)^(5/3); results are cached per strength.  Raises ``ValueError``
    for a nonpositive argument (use the degenerate-field path for cn2 = 0
    instead of calling this with 0).
    """
    if not (isinstance(d_over_r0, (int, float)) and math.isfinite(d_over_r0)
            and d_over_r0 > 0):
        raise ValueError(f"d_over_r0 must be finite and positive, got {d_over_r0!r}")
    d = float(d_over_r0)
    global _unit_matrix_cache
    with _cov_lock:
        cached = _scaled_cache.get(d)
        if cached is not None:
            return cached
        if _unit_matrix_cache is None:
            _unit_matrix_cache = _unit_noll_matrix()
        out = ModalCovariance(matrix=_unit_matrix_cache * d ** (5.0 / 3.0),
                              d_over_r0=d)
        if len(_scaled_cache) < 256:
            _scaled_cache[d] = out
        return out
