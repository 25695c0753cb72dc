"""Optics core: Fried scalars, Zernike basis, modal covariance.

Oracles used here are independent of the implementation paths: the Fried
parameter and isoplanatic angle are checked against explicit path-integral
quadrature, the modal covariance against the Weber-Schafheitlin closed
form in gamma functions plus Noll's residual table, and the Zernike
normalization against disk quadrature.
"""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma as sgamma

from turbsim.optics import (
    ModalCovariance,
    TurbulenceProtocol,
    ZernikeSpec,
    fried_parameter,
    isoplanatic_angle,
    noll_covariance,
    noll_to_nm,
    pupil_mask,
    tilt_pixel_scale,
    zernike_eval,
    zernike_raster,
)


def make_protocol(**kw):
    base = dict(distance_m=400.0, focal_length_m=1.0, f_number=8.0,
                scene_width_m=0.25, cn2=5e-14, image_width_px=256,
                image_height_px=256)
    base.update(kw)
    return TurbulenceProtocol(**base)


# ---------------------------------------------------------------------------
# Noll index bookkeeping


# Independent enumeration of the first 36 Noll (n, m) pairs; sign of m
# marks the sine term.
NOLL_TABLE = {
    1: (0, 0), 2: (1, 1), 3: (1, -1), 4: (2, 0), 5: (2, -2), 6: (2, 2),
    7: (3, -1), 8: (3, 1), 9: (3, -3), 10: (3, 3), 11: (4, 0), 12: (4, 2),
    13: (4, -2), 14: (4, 4), 15: (4, -4), 16: (5, 1), 17: (5, -1),
    18: (5, 3), 19: (5, -3), 20: (5, 5), 21: (5, -5), 22: (6, 0),
    23: (6, -2), 24: (6, 2), 25: (6, -4), 26: (6, 4), 27: (6, -6),
    28: (6, 6), 29: (7, -1), 30: (7, 1), 31: (7, -3), 32: (7, 3),
    33: (7, -5), 34: (7, 5), 35: (7, -7), 36: (7, 7),
}


def test_noll_to_nm_matches_reference_table():
    for j, nm in NOLL_TABLE.items():
        assert noll_to_nm(j) == nm


def test_noll_index_rejects_nonpositive():
    with pytest.raises(ValueError):
        noll_to_nm(0)


# ---------------------------------------------------------------------------
# Fried parameter and isoplanatic angle


def test_fried_parameter_reference_value():
    # lambda = 525 nm, L = 400 m, Cn2 = 5e-14 -> r0 about 0.0255 m.
    p = make_protocol()
    assert fried_parameter(p) == pytest.approx(0.0255, rel=2e-2)


def test_fried_parameter_against_path_integral():
    p = make_protocol()
    k = 2.0 * math.pi / p.wavelength_m
    integral, _ = integrate.quad(
        lambda z: (z / p.distance_m) ** (5.0 / 3.0), 0.0, p.distance_m)
    expected = (0.423 * k * k * p.cn2 * integral) ** (-3.0 / 5.0)
    assert fried_parameter(p) == pytest.approx(expected, rel=1e-10)


def test_fried_parameter_no_turbulence_signal():
    p = make_protocol(cn2=0.0)
    assert math.isinf(fried_parameter(p))
    assert p.d_over_r0() == 0.0


def test_isoplanatic_angle_against_path_integral():
    p = make_protocol()
    k = 2.0 * math.pi / p.wavelength_m
    integral, _ = integrate.quad(lambda z: p.cn2 * z ** (5.0 / 3.0),
                                 0.0, p.distance_m)
    expected = (2.914 * k * k * integral) ** (-3.0 / 5.0)
    assert isoplanatic_angle(p) == pytest.approx(expected, rel=1e-10)


def test_isoplanatic_angle_distance_scaling():
    # Doubling the path multiplies theta0 by 2^(-8/5).
    p1 = make_protocol(distance_m=300.0)
    p2 = make_protocol(distance_m=600.0)
    ratio = isoplanatic_angle(p2) / isoplanatic_angle(p1)
    assert ratio == pytest.approx(2.0 ** (-8.0 / 5.0), rel=1e-12)


def test_fried_parameter_monotone_in_cn2():
    vals = [fried_parameter(make_protocol(cn2=c)) for c in
            (1e-15, 5e-15, 2e-14, 8e-14)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# Zernike evaluation


def test_tilt_value_at_pupil_edge():
    # Noll Z2 at (rho=1, theta=0) is exactly 2.
    assert zernike_eval(2, 1.0, 0.0) == pytest.approx(2.0, abs=1e-14)


def test_piston_is_one():
    rho = np.linspace(0, 1, 7)
    assert np.allclose(zernike_eval(1, rho, rho), 1.0)


def test_orthonormality_by_polar_quadrature():
    # Gauss-Legendre in rho^2 and a uniform angular rule integrate Zernike
    # products exactly to machine precision: the full 36-mode Gram must be
    # the identity.  This pins the Noll normalization itself.
    from numpy.polynomial.legendre import leggauss

    nodes, weights = leggauss(48)
    u = 0.5 * (nodes + 1.0)
    wu = 0.5 * weights
    rho = np.sqrt(u)
    ntheta = 256
    theta = (np.arange(ntheta) + 0.5) * (2.0 * np.pi / ntheta)
    rr, tt = np.meshgrid(rho, theta, indexing="ij")
    z = np.stack([zernike_eval(i, rr, tt).ravel() for i in range(1, 37)])
    w = np.outer(wu, np.full(ntheta, 1.0 / ntheta)).ravel()
    gram = (z * w) @ z.T
    assert np.abs(gram - np.eye(36)).max() < 1e-12


def test_orthonormality_on_pupil_raster():
    # Plain pixel-center disk averaging on the default 256 raster converges
    # like O(1/n) because of the jagged disk edge; the worst pair among all
    # 36 modes sits near 3.4e-3 at n = 256.  Pin that raster-quadrature
    # accuracy so a regression in the raster convention is caught.
    spec = ZernikeSpec()
    mask = pupil_mask(spec)
    count = mask.sum()
    z = np.stack([zernike_raster(i, spec).ravel() for i in range(1, 37)])
    gram = (z @ z.T) / count
    err = np.abs(gram - np.eye(36))
    assert err.max() < 4e-3
    # Piston through defocus (the modes that dominate every consumer) are
    # much better resolved.
    assert err[:4, :4].max() < 2e-4


def test_zernike_raster_zero_outside_disk():
    spec = ZernikeSpec(pupil_grid_n=64)
    z = zernike_raster(6, spec)
    assert np.all(z[~pupil_mask(spec)] == 0.0)


def test_zernike_eval_rejects_out_of_range_mode():
    with pytest.raises(ValueError):
        zernike_eval(37, 0.5, 0.0)
    with pytest.raises(ValueError):
        zernike_eval(0, 0.5, 0.0)


# ---------------------------------------------------------------------------
# Modal covariance


def closed_form_covariance(i: int, j: int, d_over_r0: float) -> float:
    """Weber-Schafheitlin closed form for the Kolmogorov modal covariance."""
    n1, m1 = noll_to_nm(i)
    n2, m2 = noll_to_nm(j)
    if i == 1 or j == 1:
        return 0.0
    if abs(m1) != abs(m2):
        return 0.0
    if m1 != 0 and (i % 2) != (j % 2):
        return 0.0
    const = (4.0 * (24.0 / 5.0 * sgamma(6.0 / 5.0)) ** (5.0 / 6.0)
             * sgamma(11.0 / 6.0) ** 2 / math.pi)
    sign = (-1.0) ** ((n1 + n2 - 2 * abs(m1)) // 2)
    num = sgamma(14.0 / 3.0) * sgamma((n1 + n2 - 5.0 / 3.0) / 2.0)
    den = (2.0 ** (14.0 / 3.0)
           * sgamma((n1 - n2 + 17.0 / 3.0) / 2.0)
           * sgamma((n2 - n1 + 17.0 / 3.0) / 2.0)
           * sgamma((n1 + n2 + 23.0 / 3.0) / 2.0))
    return (const * sign * math.sqrt((n1 + 1.0) * (n2 + 1.0))
            * num / den * d_over_r0 ** (5.0 / 3.0))


def test_covariance_matches_closed_form():
    cov = noll_covariance(1.0).matrix
    for i in range(1, 37):
        for j in range(1, 37):
            expected = closed_form_covariance(i, j, 1.0)
            assert cov[i - 1, j - 1] == pytest.approx(expected, rel=1e-6,
                                                      abs=1e-12), (i, j)


def test_tilt_variance_noll_value():
    # Per-axis tilt variance is 0.448 (D/r0)^(5/3); cross-checked against
    # Noll's residual table, Delta1 - Delta3 = 1.0299 - 0.134 = 2 E[a2^2].
    cov = noll_covariance(1.0)
    var2 = cov.matrix[1, 1]
    assert var2 == pytest.approx(0.448, rel=5e-3)
    assert var2 == pytest.approx((1.0299 - 0.134) / 2.0, rel=1e-2)
    assert cov.matrix[2, 2] == pytest.approx(var2, rel=1e-9)


def test_covariance_piston_row_zero():
    cov = noll_covariance(2.0).matrix
    assert np.all(cov[0, :] == 0.0)
    assert np.all(cov[:, 0] == 0.0)


def test_covariance_selection_rules():
    cov = noll_covariance(1.5).matrix
    for i in range(2, 37):
        n1, m1 = noll_to_nm(i)
        for j in range(2, 37):
            n2, m2 = noll_to_nm(j)
            if abs(m1) != abs(m2) or (m1 != 0 and (i % 2) != (j % 2)):
                assert cov[i - 1, j - 1] == 0.0, (i, j)
    # Sanity: the famous nonzero cross terms are present.
    assert cov[3, 10] != 0.0      # defocus-spherical
    assert cov[1, 7] != 0.0       # tilt-coma


def test_covariance_strength_scaling_exact():
    base = noll_covariance(1.0).matrix
    scaled = noll_covariance(2.5).matrix
    assert np.allclose(scaled, base * 2.5 ** (5.0 / 3.0), rtol=1e-13, atol=0)


def test_covariance_symmetric_psd():
    m = noll_covariance(3.0).matrix
    assert np.array_equal(m, m.T)
    eig = np.linalg.eigvalsh(m)
    assert eig.min() >= -1e-12 * eig.max()


def test_covariance_rejects_nonpositive():
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            noll_covariance(bad)


def test_modal_covariance_shape_checked():
    with pytest.raises(ValueError):
        ModalCovariance(matrix=np.zeros((4, 4)), d_over_r0=1.0)


# ---------------------------------------------------------------------------
# Tilt pixel scale


def test_tilt_pixel_scale_closed_form():
    # f = 1 m, D = f/8, lambda = 525 nm, L = 400 m, object pitch 1 mm.
    p = TurbulenceProtocol(distance_m=400.0, focal_length_m=1.0, f_number=8.0,
                           scene_width_m=0.256, cn2=5e-14,
                           image_width_px=256)
    assert p.pixel_pitch_object_m == pytest.approx(1e-3, rel=1e-12)
    k = 2.0 * math.pi / 525e-9
    pitch_sensor = 1e-3 * 1.0 / 400.0
    expected = 4.0 * 1.0 / (k * (1.0 / 8.0) * pitch_sensor)
    assert tilt_pixel_scale(p) == pytest.approx(expected, rel=1e-12)


def test_tilt_pixel_scale_focal_length_invariance():
    # The pixel-space tilt scale collapses to 4 L W / (k D scene): focal
    # length cancels between image displacement and sensor pitch.
    p1 = make_protocol(focal_length_m=1.0, f_number=8.0)
    p2 = make_protocol(focal_length_m=2.0, f_number=16.0)  # same D
    assert tilt_pixel_scale(p1) == pytest.approx(tilt_pixel_scale(p2), rel=1e-12)


# ---------------------------------------------------------------------------
# Protocol validation and serialization


def test_protocol_roundtrip_text():
    p = make_protocol(noise_sigma=0.01)
    q = TurbulenceProtocol.from_text(p.to_text())
    assert q == p


def test_protocol_text_is_flat_key_value():
    text = make_protocol().to_text()
    for line in text.strip().splitlines():
        key, sep, val = line.partition("=")
        assert sep == "="
        float(val)  # parses as a number


def test_protocol_rejects_unknown_key():
    text = make_protocol().to_text() + "bogus_key = 1.0\n"
    with pytest.raises(ValueError, match="unknown key"):
        TurbulenceProtocol.from_text(text)


def test_protocol_rejects_missing_required():
    with pytest.raises(ValueError, match="missing required"):
        TurbulenceProtocol.from_text("distance_m = 100.0\n")


@pytest.mark.parametrize("field,value", [
    ("distance_m", -1.0),
    ("distance_m", 0.0),
    ("focal_length_m", 0.0),
    ("f_number", 0.5),
    ("scene_width_m", -2.0),
    ("cn2", -1e-14),
    ("wavelength_m", 0.0),
    ("noise_sigma", -0.1),
    ("image_width_px", 4),
])
def test_protocol_rejects_invalid_fields(field, value):
    with pytest.raises(ValueError):
        make_protocol(**{field: value})


def test_protocol_derived_geometry():
    p = make_protocol(focal_length_m=2.0, f_number=8.0)
    assert p.aperture_m == pytest.approx(0.25)
    assert p.pixel_pitch_object_m == pytest.approx(0.25 / 256)
    assert p.pixel_pitch_sensor_m == pytest.approx(
        (0.25 / 256) * 2.0 / 400.0)
