"""Metric and image-IO tests, checked against closed forms and skimage."""

import math

import numpy as np
import pytest
from skimage.metrics import peak_signal_noise_ratio, structural_similarity

from turbsim import imageio
from turbsim.metrics import psnr, ssim


def test_psnr_closed_form():
    ref = np.zeros((8, 8))
    tst = np.full((8, 8), 0.1)
    # mse = 0.01 -> 10 log10(1 / 0.01) = 20 dB
    assert psnr(ref, tst) == pytest.approx(20.0, abs=1e-12)
    assert psnr(ref, tst, data_range=2.0) == pytest.approx(
        20.0 + 20.0 * math.log10(2.0), abs=1e-12)


def test_psnr_identical_is_infinite():
    img = np.random.default_rng(0).random((16, 16))
    assert psnr(img, img) == math.inf


def test_psnr_matches_skimage():
    gen = np.random.default_rng(1)
    ref = gen.random((32, 32))
    tst = np.clip(ref + gen.normal(scale=0.05, size=(32, 32)), 0, 1)
    assert psnr(ref, tst) == pytest.approx(
        peak_signal_noise_ratio(ref, tst, data_range=1.0), rel=1e-12)


def test_ssim_identical_is_one():
    img = np.random.default_rng(2).random((24, 24))
    assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)


def test_ssim_matches_skimage():
    gen = np.random.default_rng(3)
    ref = gen.random((48, 40))
    tst = np.clip(ref + gen.normal(scale=0.1, size=(48, 40)), 0, 1)
    mine = ssim(ref, tst)
    theirs = structural_similarity(ref, tst, data_range=1.0,
                                   gaussian_weights=True, sigma=1.5,
                                   use_sample_covariance=False)
    assert mine == pytest.approx(theirs, abs=1e-7)


def test_ssim_rgb_is_channel_mean():
    gen = np.random.default_rng(4)
    ref = gen.random((32, 32, 3))
    tst = np.clip(ref + gen.normal(scale=0.05, size=ref.shape), 0, 1)
    per = [ssim(ref[:, :, c], tst[:, :, c]) for c in range(3)]
    assert ssim(ref, tst) == pytest.approx(np.mean(per), abs=1e-12)


def test_ssim_orders_degradations():
    gen = np.random.default_rng(5)
    ref = gen.random((48, 48))
    mild = np.clip(ref + gen.normal(scale=0.02, size=ref.shape), 0, 1)
    harsh = np.clip(ref + gen.normal(scale=0.2, size=ref.shape), 0, 1)
    assert ssim(ref, mild) > ssim(ref, harsh)


def test_metric_validation():
    with pytest.raises(ValueError, match="mismatch"):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))
    with pytest.raises(ValueError, match="data_range"):
        psnr(np.zeros((4, 4)), np.zeros((4, 4)), data_range=0.0)
    with pytest.raises(ValueError, match="at least"):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))


def test_png_round_trip_quantized(tmp_path):
    gen = np.random.default_rng(6)
    img = gen.random((20, 24, 3))
    path = tmp_path / "x.png"
    imageio.save_png(path, img)
    back = imageio.load_png(path)
    assert back.dtype == np.float32
    assert back.shape == (20, 24, 3)
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-6


def test_png_grayscale(tmp_path):
    img = np.linspace(0, 1, 64).reshape(8, 8)
    path = tmp_path / "g.png"
    imageio.save_png(path, img)
    back = imageio.load_png(path)
    assert back.shape == (8, 8)


def test_png_clips_out_of_range(tmp_path):
    img = np.array([[-0.5, 2.0], [0.25, 0.75]])
    path = tmp_path / "c.png"
    imageio.save_png(path, img)
    back = imageio.load_png(path)
    assert back[0, 0] == 0.0 and back[0, 1] == 1.0


def test_raw_round_trip_exact(tmp_path):
    gen = np.random.default_rng(7)
    for shape in ((16, 12), (10, 10, 3)):
        img = gen.normal(size=shape).astype(np.float32)
        path = tmp_path / "x.raw"
        imageio.save_raw(path, img)
        back = imageio.load_raw(path)
        np.testing.assert_array_equal(back, img)
        assert back.dtype == np.float32


def test_raw_rejects_garbage(tmp_path):
    path = tmp_path / "bad.raw"
    path.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK")
    with pytest.raises(ValueError, match="not a raw"):
        imageio.load_raw(path)
    good = tmp_path / "good.raw"
    imageio.save_raw(good, np.zeros((8, 8), dtype=np.float32))
    good.write_bytes(good.read_bytes()[:40])
    with pytest.raises(ValueError, match="truncated"):
        imageio.load_raw(good)


def test_io_rejects_bad_shapes(tmp_path):
    with pytest.raises(ValueError, match="expected"):
        imageio.save_png(tmp_path / "x.png", np.zeros((4, 4, 2)))
    with pytest.raises(ValueError, match="expected"):
        imageio.save_raw(tmp_path / "x.raw", np.zeros(16))
