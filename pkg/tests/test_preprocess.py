import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from retinadx.errors import ConfigError
from retinadx.image_core import to_gray
from retinadx.labels import ClassLabel
from retinadx.preprocess import (
    PreprocessConfig, equalization_lut, fov_mask, histogram, histogram_equalize,
    median_filter, preprocess,
)
from retinadx.synth import SynthParams, generate_fundus

small_gray = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def brute_median(img, k):
    h, w = img.shape
    r = k // 2
    pad = np.pad(img, r, mode="edge")
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            out[y, x] = int(np.median(pad[y:y + k, x:x + k]))
    return out


def test_histogram_examples():
    h = histogram(np.array([[7]], np.uint8))
    assert h.counts[7] == 1 and h.counts.sum() == 1
    assert histogram(np.zeros((4, 4), np.uint8)).counts[0] == 16
    ramp = np.arange(256, dtype=np.uint8).reshape(1, 256)
    assert (histogram(ramp).counts == 1).all()


@given(small_gray)
def test_histogram_total(img):
    h = histogram(img)
    assert h.counts.sum() == h.total == img.size
    assert abs(h.probabilities.sum() - 1) < 1e-12


def test_histogram_with_mask():
    img = np.array([[1, 2], [3, 4]], np.uint8)
    h = histogram(img, np.array([[True, False], [False, True]]))
    assert h.total == 2 and h.counts[1] == 1 and h.counts[4] == 1


def test_equalize_examples():
    c = np.full((3, 3), 77, np.uint8)
    out = histogram_equalize(c)
    assert np.unique(out).size == 1
    two = np.array([[0, 255]], np.uint8)
    np.testing.assert_array_equal(histogram_equalize(two), two)
    ramp = np.arange(256, dtype=np.uint8).reshape(1, 256)
    np.testing.assert_array_equal(histogram_equalize(ramp), ramp)


def test_equalize_matches_cdf_formula(rng):
    img = rng.integers(30, 200, size=(20, 20)).astype(np.uint8)
    counts = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(counts)
    cmin = cdf[counts > 0][0]
    want = np.round((cdf[img] - cmin) / (img.size - cmin) * 255)
    np.testing.assert_array_equal(histogram_equalize(img), want.astype(np.uint8))


@given(small_gray)
def test_equalize_monotone(img):
    lut = equalization_lut(histogram(img))
    assert (np.diff(lut.astype(int)) >= 0).all()
    out = histogram_equalize(img)
    order = np.argsort(img.ravel(), kind="stable")
    assert (np.diff(out.ravel()[order].astype(int)) >= 0).all()


def test_median_examples():
    c = np.full((6, 5), 42, np.uint8)
    for k in (1, 3, 5, 7):
        np.testing.assert_array_equal(median_filter(c, k), c)
    spike = np.zeros((5, 5), np.uint8)
    spike[2, 2] = 255
    assert not median_filter(spike, 3).any()
    assert median_filter(np.arange(9, dtype=np.uint8).reshape(3, 3), 3)[1, 1] == 4
    with pytest.raises(ConfigError):
        median_filter(c, 4)
    with pytest.raises(ConfigError):
        median_filter(c, 0)


@given(small_gray, st.sampled_from([1, 3, 5]))
def test_median_matches_brute_force(img, k):
    np.testing.assert_array_equal(median_filter(img, k), brute_median(img, k))


@given(small_gray, st.sampled_from([3, 5]))
def test_median_values_come_from_window(img, k):
    out = median_filter(img, k)
    r = k // 2
    pad = np.pad(img, r, mode="edge")
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            assert out[y, x] in pad[y:y + k, x:x + k]


@given(st.integers(2, 15), st.integers(2, 15), st.integers(0, 14),
       st.integers(0, 255), st.integers(0, 255), st.sampled_from([3, 5]))
def test_median_idempotent_on_steps(h, w, cut, a, b, k):
    img = np.full((h, w), a, np.uint8)
    img[:, min(cut, w):] = b
    once = median_filter(img, k)
    np.testing.assert_array_equal(median_filter(once, k), once)


def test_preprocess_identity_tail(rng):
    img = rng.integers(0, 256, size=(9, 7, 3)).astype(np.uint8)
    cfg = PreprocessConfig(median_kernel=1, equalize=False)
    np.testing.assert_array_equal(preprocess(img, cfg), to_gray(img))


def test_preprocess_constant():
    out = preprocess(np.full((8, 8, 3), 90, np.uint8))
    assert np.unique(out).size == 1


def test_config_validation():
    with pytest.raises(ConfigError):
        PreprocessConfig(median_kernel=4)
    with pytest.raises(ConfigError):
        PreprocessConfig(gray_mode="red")


def test_salt_and_pepper_removed():
    img, _ = generate_fundus(SynthParams(class_label=ClassLabel.NORMAL, seed=0))
    u = np.random.default_rng(0).random(img.shape[:2])
    noisy = img.copy()
    noisy[u < 0.025] = 0
    noisy[(u >= 0.025) & (u < 0.05)] = 255
    cfg = PreprocessConfig(median_kernel=5)
    agree = np.mean(preprocess(noisy, cfg) == preprocess(img, cfg))
    assert agree >= 0.99, f"only {agree:.3f} of pixels agree"


def test_fov_mask_on_fundus(fundus_samples):
    img, truth = fundus_samples[ClassLabel.NORMAL]
    fov = fov_mask(to_gray(img))
    inter = (fov & truth.fov_mask).sum()
    assert inter / (fov | truth.fov_mask).sum() > 0.95


def test_fov_mask_degenerate_is_full():
    assert fov_mask(np.zeros((10, 10), np.uint8)).all()
