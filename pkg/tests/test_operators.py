"""Degradation operator tests.

Both linear operators are validated against brute-force loops and
exact adjoint (dot-product) identities; the composed forward model is
checked for linearity, determinism, and noise reproducibility.
"""

import numpy as np
import pytest
from scipy import ndimage

from turbsim import operators as ops
from turbsim import psf, rng
from turbsim.field import ZernikeField, build_autocorrelation, sample_field
from turbsim.operators import ShiftField
from turbsim.optics import TurbulenceProtocol


def protocol(cn2: float = 6e-15, px: int = 32,
             noise_sigma: float = 0.0) -> TurbulenceProtocol:
    # Scene width keeps the object-plane pitch at the 256 px reference
    # value so the raster size does not change the geometry.
    return TurbulenceProtocol(distance_m=400.0, focal_length_m=1.2,
                              f_number=8.0, scene_width_m=px * 0.5 / 256,
                              cn2=cn2, image_width_px=px,
                              image_height_px=px, noise_sigma=noise_sigma)


@pytest.fixture(scope="module")
def bundle():
    p = protocol()
    basis = psf.build_psf_basis(p, dr0_range=(0.05, 4.0), n_samples=800,
                                k=60, s=33, seed=7)
    p2s = psf.fit_p2s_surrogate(basis, n_train=2000, n_heldout=500, seed=3)
    return p, basis, p2s


# ---------------------------------------------------------------------------
# Tilt warp


def brute_warp(img: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    h, w = img.shape
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            ys = min(max(y + shifts[y, x, 0], 0.0), h - 1.0)
            xs = min(max(x + shifts[y, x, 1], 0.0), w - 1.0)
            y0 = min(int(np.floor(ys)), h - 2)
            x0 = min(int(np.floor(xs)), w - 2)
            wy = ys - y0
            wx = xs - x0
            out[y, x] = ((1 - wy) * (1 - wx) * img[y0, x0]
                         + (1 - wy) * wx * img[y0, x0 + 1]
                         + wy * (1 - wx) * img[y0 + 1, x0]
                         + wy * wx * img[y0 + 1, x0 + 1])
    return out


def test_warp_zero_shift_is_identity():
    gen = np.random.default_rng(0)
    img = gen.random((9, 7))
    sf = ShiftField(np.zeros((9, 7, 2)))
    np.testing.assert_array_equal(ops.tilt_warp(img, sf), img)


def test_warp_integer_shift_gathers_with_clamp():
    gen = np.random.default_rng(1)
    img = gen.random((8, 8))
    s = np.zeros((8, 8, 2))
    s[:, :, 0] = 2.0
    s[:, :, 1] = -3.0
    out = ops.tilt_warp(img, ShiftField(s))
    rows = np.clip(np.arange(8) + 2, 0, 7)
    cols = np.clip(np.arange(8) - 3, 0, 7)
    np.testing.assert_allclose(out, img[np.ix_(rows, cols)], atol=1e-15)


def test_warp_matches_brute_bilinear():
    gen = np.random.default_rng(2)
    img = gen.random((11, 13))
    # Shifts large enough to run off the frame on purpose.
    shifts = gen.normal(scale=3.0, size=(11, 13, 2))
    out = ops.tilt_warp(img, ShiftField(shifts))
    np.testing.assert_allclose(out, brute_warp(img, shifts), atol=1e-13)


def test_warp_adjoint_identity():
    gen = np.random.default_rng(3)
    for _ in range(20):
        h, w = gen.integers(4, 24, size=2)
        sf = ShiftField(gen.normal(scale=2.0, size=(h, w, 2)))
        x = gen.normal(size=(h, w))
        y = gen.normal(size=(h, w))
        lhs = float(np.vdot(ops.tilt_warp(x, sf), y))
        rhs = float(np.vdot(x, ops.tilt_warp_adjoint(y, sf)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_warp_channels_match_planewise():
    gen = np.random.default_rng(4)
    img = gen.random((10, 12, 3))
    sf = ShiftField(gen.normal(scale=1.5, size=(10, 12, 2)))
    out = ops.tilt_warp(img, sf)
    for c in range(3):
        np.testing.assert_array_equal(out[:, :, c],
                                      ops.tilt_warp(img[:, :, c], sf))
    adj = ops.tilt_warp_adjoint(img, sf)
    for c in range(3):
        np.testing.assert_allclose(
            adj[:, :, c], ops.tilt_warp_adjoint(img[:, :, c], sf), atol=1e-12)


def test_warp_follows_dtype():
    gen = np.random.default_rng(5)
    img = gen.random((8, 8)).astype(np.float32)
    sf = ShiftField(gen.normal(size=(8, 8, 2)))
    assert ops.tilt_warp(img, sf).dtype == np.float32
    assert ops.tilt_warp_adjoint(img, sf).dtype == np.float32
    assert ops.tilt_warp(img.astype(np.float64), sf).dtype == np.float64


def test_warp_rejects_mismatched_field():
    with pytest.raises(ValueError, match="does not match"):
        ops.tilt_warp(np.zeros((6, 6)), ShiftField(np.zeros((5, 6, 2))))
    with pytest.raises(ValueError, match="shifts must be"):
        ShiftField(np.zeros((5, 6, 3)))
    with pytest.raises(ValueError, match="finite"):
        ShiftField(np.full((4, 4, 2), np.nan))


# ---------------------------------------------------------------------------
# Spatially varying blur


def brute_blur(img: np.ndarray, beta: np.ndarray,
               kernels: np.ndarray) -> np.ndarray:
    h, w = img.shape
    k, s, _ = kernels.shape
    r = s // 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for ki in range(k):
                conv = 0.0
                for ty in range(s):
                    for tx in range(s):
                        yy = min(max(y + r - ty, 0), h - 1)
                        xx = min(max(x + r - tx, 0), w - 1)
                        conv += kernels[ki, ty, tx] * img[yy, xx]
                acc += beta[y, x, ki] * conv
            out[y, x] = acc
    return out


def test_blur_matches_brute_loop():
    gen = np.random.default_rng(6)
    img = gen.random((12, 14))
    kernels = gen.random((4, 5, 5))
    beta = gen.normal(size=(12, 14, 4))
    out = ops.sv_blur(img, beta, kernels)
    np.testing.assert_allclose(out, brute_blur(img, beta, kernels),
                               atol=1e-12)


def test_blur_uniform_weights_equal_plain_convolution():
    gen = np.random.default_rng(7)
    img = gen.random((20, 16))
    k = gen.random((7, 7))
    k /= k.sum()
    beta = np.ones((20, 16, 1))
    out = ops.sv_blur(img, beta, k[None])
    ref = ndimage.convolve(img, k, mode="nearest")
    np.testing.assert_allclose(out, ref, atol=1e-13)


def test_blur_delta_kernel_is_identity():
    gen = np.random.default_rng(8)
    img = gen.random((16, 16))
    delta = np.zeros((1, 9, 9))
    delta[0, 4, 4] = 1.0
    out = ops.sv_blur(img, np.ones((16, 16, 1)), delta)
    np.testing.assert_allclose(out, img, atol=1e-12)


def test_blur_adjoint_identity():
    gen = np.random.default_rng(9)
    for _ in range(20):
        h, w = gen.integers(6, 28, size=2)
        k = int(gen.integers(1, 6))
        s = int(gen.choice([3, 5, 7]))
        kernels = gen.normal(size=(k, s, s))
        beta = gen.normal(size=(h, w, k))
        x = gen.normal(size=(h, w))
        y = gen.normal(size=(h, w))
        lhs = float(np.vdot(ops.sv_blur(x, beta, kernels), y))
        rhs = float(np.vdot(x, ops.sv_blur_adjoint(y, beta, kernels)))
        assert lhs == pytest.approx(rhs, rel=1e-11)


def test_blur_channels_match_planewise():
    gen = np.random.default_rng(10)
    img = gen.random((10, 12, 3))
    kernels = gen.random((3, 5, 5))
    beta = gen.normal(size=(10, 12, 3))
    out = ops.sv_blur(img, beta, kernels)
    for c in range(3):
        np.testing.assert_allclose(out[:, :, c],
                                   ops.sv_blur(img[:, :, c], beta, kernels),
                                   atol=1e-13)


def test_blur_follows_dtype():
    gen = np.random.default_rng(11)
    img = gen.random((12, 12)).astype(np.float32)
    kernels = gen.random((2, 5, 5))
    beta = gen.normal(size=(12, 12, 2))
    assert ops.sv_blur(img, beta, kernels).dtype == np.float32
    assert ops.sv_blur_adjoint(img, beta, kernels).dtype == np.float32


def test_blur_rejects_bad_shapes():
    img = np.zeros((8, 8))
    with pytest.raises(ValueError, match="odd"):
        ops.sv_blur(img, np.zeros((8, 8, 1)), np.zeros((1, 4, 4)))
    with pytest.raises(ValueError, match="beta"):
        ops.sv_blur(img, np.zeros((8, 7, 1)), np.zeros((1, 5, 5)))
    with pytest.raises(ValueError, match="kernels"):
        ops.sv_blur(img, np.zeros((8, 8, 1)), np.zeros((5, 5)))


# ---------------------------------------------------------------------------
# Composed forward model


def test_realize_is_deterministic(bundle):
    p, basis, p2s = bundle
    a = ops.realize(p, 42, basis, p2s)
    b = ops.realize(p, 42, basis, p2s)
    np.testing.assert_array_equal(a.shift_field.shifts, b.shift_field.shifts)
    np.testing.assert_array_equal(a.coeff_maps.beta, b.coeff_maps.beta)
    c = ops.realize(p, 43, basis, p2s)
    assert np.abs(a.shift_field.shifts - c.shift_field.shifts).max() > 1e-6


def test_forward_is_linear_without_noise(bundle):
    p, basis, p2s = bundle
    rz = ops.realize(p, 42, basis, p2s)
    gen = np.random.default_rng(12)
    x = gen.random((32, 32))
    y = gen.random((32, 32))
    lhs = ops.simulate_forward(2.5 * x + y, rz, with_noise=False)
    rhs = (2.5 * ops.simulate_forward(x, rz, with_noise=False)
           + ops.simulate_forward(y, rz, with_noise=False))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_forward_equals_warp_then_blur(bundle):
    p, basis, p2s = bundle
    rz = ops.realize(p, 42, basis, p2s)
    gen = np.random.default_rng(13)
    img = gen.random((32, 32))
    manual = ops.sv_blur(ops.tilt_warp(img, rz.shift_field),
                         rz.coeff_maps.beta, basis.kernels)
    np.testing.assert_array_equal(
        ops.simulate_forward(img, rz, with_noise=False), manual)


def test_forward_noise_is_reproducible(bundle):
    p, basis, p2s = bundle
    noisy_p = protocol(noise_sigma=0.02)
    rz = ops.realize(noisy_p, 42, basis, p2s)
    gen = np.random.default_rng(14)
    img = gen.random((32, 32))
    a = ops.simulate_forward(img, rz)
    b = ops.simulate_forward(img, rz)
    np.testing.assert_array_equal(a, b)
    clean = ops.simulate_forward(img, rz, with_noise=False)
    noise = (a - clean) / 0.02
    expect = rng.normals(42, rng.stream_id(rng.DOMAIN_NOISE, 0),
                         32 * 32).reshape(32, 32)
    np.testing.assert_allclose(noise, expect, atol=1e-5)


def test_forward_noise_channels_are_independent(bundle):
    p, basis, p2s = bundle
    noisy_p = protocol(noise_sigma=0.02)
    rz = ops.realize(noisy_p, 42, basis, p2s)
    planes = rz.noise_plane(channels=3)
    assert planes.shape == (32, 32, 3)
    assert np.abs(planes[:, :, 0] - planes[:, :, 1]).max() > 1e-3
    np.testing.assert_array_equal(planes[:, :, 0], rz.noise_plane())


def test_vjp_is_adjoint_of_forward(bundle):
    p, basis, p2s = bundle
    rz = ops.realize(p, 42, basis, p2s)
    gen = np.random.default_rng(15)
    for _ in range(10):
        x = gen.normal(size=(32, 32))
        c = gen.normal(size=(32, 32))
        lhs = float(np.vdot(ops.simulate_forward(x, rz, with_noise=False), c))
        rhs = float(np.vdot(x, ops.simulate_vjp(c, rz)))
        assert lhs == pytest.approx(rhs, rel=1e-11)


def test_forward_rejects_mismatched_raster(bundle):
    p, basis, p2s = bundle
    rz = ops.realize(p, 42, basis, p2s)
    with pytest.raises(ValueError, match="does not match"):
        ops.simulate_forward(np.zeros((16, 16)), rz)
    with pytest.raises(ValueError, match="does not match"):
        ops.simulate_vjp(np.zeros((16, 16)), rz)


def test_zero_turbulence_shifts_are_zero(bundle):
    _, basis, p2s = bundle
    p0 = protocol(cn2=0.0)
    rz = ops.realize(p0, 42, basis, p2s)
    np.testing.assert_array_equal(rz.shift_field.shifts, 0.0)
    # Every pixel carries the pinned zero-aberration weights.
    np.testing.assert_array_equal(rz.coeff_maps.beta,
                                  np.broadcast_to(p2s.coef[0],
                                                  rz.coeff_maps.beta.shape))


def test_tilt_shifts_use_tilt_channels(bundle):
    p, _, _ = bundle
    data = np.zeros((8, 8, 36))
    data[:, :, 1] = 2.0          # Noll 2: column shifts
    data[:, :, 2] = -1.0         # Noll 3: row shifts
    field = ZernikeField(data, protocol(px=8), seed=0)
    sf = ops.tilt_shifts(field)
    from turbsim.optics import tilt_pixel_scale
    c = tilt_pixel_scale(field.protocol)
    np.testing.assert_allclose(sf.shifts[:, :, 0], -1.0 * c)
    np.testing.assert_allclose(sf.shifts[:, :, 1], 2.0 * c)
