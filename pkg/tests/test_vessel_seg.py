import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from retinadx.errors import ConfigError, DimensionMismatchError
from retinadx.labels import ClassLabel
from retinadx.preprocess import median_filter, preprocess
from retinadx.synth import SynthParams, generate_fundus
from retinadx.vessel_seg import (
    DIRECTIONS, DbdedConfig, VesselnessConfig, _orientations, connected_components,
    dbded, dbded_1d_candidates, dbded_decide, dice, enhance_vessels, line_footprint,
    morphological_reconstruct, remove_small_components, segment_vasculature,
    threshold_vesselness,
)

masks = arrays(bool, st.tuples(st.integers(1, 14), st.integers(1, 14)))


def reconstruct_oracle(marker, mask, connectivity=8):
    structure = ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)
    cur = marker & mask
    while True:
        nxt = ndimage.binary_dilation(cur, structure=structure) & mask
        if (nxt == cur).all():
            return cur
        cur = nxt


# -- DBDED -----------------------------------------------------------------

def test_dbded_constant_is_empty():
    img = np.full((12, 12), 80, np.uint8)
    assert not dbded(img, DbdedConfig(eta=1)).any()
    for d in DIRECTIONS:
        assert not dbded_1d_candidates(img, d, DbdedConfig(eta=1)).any()


def test_dbded_hand_example():
    row = np.array([[100, 100, 100, 0, 0, 0, 0]], np.uint8)
    cand = dbded_1d_candidates(row, "E", DbdedConfig(eta=10))
    assert cand[0, 2]
    # samples 100, 0, 0 give 33.3 + 57.7 + 10 = 101 > 100
    assert not cand[0, 1]


def test_dbded_large_eta_is_empty(rng):
    img = rng.integers(0, 256, size=(20, 20)).astype(np.uint8)
    assert not dbded(img, DbdedConfig(eta=300)).any()


def test_dbded_candidate_matches_scalar_formula(rng):
    img = rng.integers(0, 256, size=(10, 11)).astype(np.uint8)
    cfg = DbdedConfig(eta=5)
    for name, (dx, dy) in DIRECTIONS.items():
        got = dbded_1d_candidates(img, name, cfg)
        for y in range(10):
            for x in range(11):
                pts = [(x + dx * k, y + dy * k) for k in (1, 2, 3)]
                if not all(0 <= px < 11 and 0 <= py < 10 for px, py in pts):
                    assert not got[y, x]
                    continue
                s = np.array([img[py, px] for px, py in pts], float)
                want = img[y, x] >= s.mean() + s.std(ddof=1) + 5
                assert got[y, x] == want


def test_decide_rules():
    shape = (7, 7)
    none = [np.zeros(shape, bool) for _ in range(8)]
    assert not dbded_decide(none).any()
    full = [np.ones(shape, bool) for _ in range(8)]
    assert not dbded_decide(full).any()
    iso = [np.zeros(shape, bool) for _ in range(8)]
    for m in iso[:3]:
        m[3, 3] = True
    assert not dbded_decide(iso)[3, 3]
    iso[0][3, 4] = True
    assert dbded_decide(iso)[3, 3]
    with pytest.raises(DimensionMismatchError):
        dbded_decide(none[:7])


@given(st.lists(arrays(bool, (6, 6)), min_size=8, max_size=8))
def test_decide_within_union(cands):
    assert not (dbded_decide(cands) & ~np.logical_or.reduce(cands)).any()


# -- vesselness ------------------------------------------------------------

def line_image(angle_deg, size=61, width=3, depth=80, base=180):
    yy, xx = np.mgrid[:size, :size] - size // 2
    t = np.deg2rad(angle_deg)
    # distance to a line through the centre with direction (cos t, -sin t), y down
    d = np.abs(xx * np.sin(t) + yy * np.cos(t))
    img = np.full((size, size), base, float)
    img[d <= width / 2] -= depth
    return img.astype(np.uint8), d <= 1.0


def test_vesselness_constant_is_zero():
    assert not enhance_vessels(np.full((30, 30), 120, np.uint8)).any()


def test_vesselness_line_contrast():
    img, centre = line_image(0)
    v = enhance_vessels(img)
    interior = np.pad(np.ones((31, 31), bool), 15)
    on = v[centre & interior].mean()
    assert on > 0
    assert on >= 5 * np.median(v[interior])


def test_vesselness_rotation_sweep():
    cfg = VesselnessConfig()
    ref = enhance_vessels(line_image(0)[0], cfg)[20:-20, 20:-20].max()
    for a in _orientations(cfg.num_orientations):
        peak = enhance_vessels(line_image(a)[0], cfg)[20:-20, 20:-20].max()
        assert abs(peak - ref) <= 0.2 * ref, (a, peak, ref)


@given(st.integers(0, 60))
def test_vesselness_constant_shift(c):
    img, _ = line_image(30, size=41, base=150)
    a = enhance_vessels(img)
    b = enhance_vessels((img.astype(int) + c).astype(np.uint8))
    assert np.abs(a - b).max() <= 1e-6


def test_vesselness_nonnegative(rng):
    img = rng.integers(0, 256, size=(40, 40)).astype(np.uint8)
    assert (enhance_vessels(img) >= 0).all()


def test_line_footprint_shape():
    fp = line_footprint(9, 0)
    assert fp.sum() == 9 and fp[fp.shape[0] // 2].all()
    assert line_footprint(9, 90).sum() == 9


# -- thresholding ----------------------------------------------------------

def test_threshold_examples():
    assert not threshold_vesselness(np.zeros((5, 5)), 0.5).any()
    v = np.zeros((5, 5))
    v[2, 3] = 0.7
    np.testing.assert_array_equal(threshold_vesselness(v, 0.5), v > 0)
    with pytest.raises(ConfigError):
        threshold_vesselness(v, 1.5)


# -- connected components --------------------------------------------------

def test_cc_examples():
    assert connected_components(np.zeros((4, 4), bool)).num_labels == 0
    diag = np.array([[1, 0], [0, 1]], bool)
    assert connected_components(diag, 4).num_labels == 2
    assert connected_components(diag, 8).num_labels == 1
    full = connected_components(np.ones((5, 6), bool))
    assert full.num_labels == 1 and (full.labels == 1).all()


@given(masks, st.sampled_from([4, 8]))
def test_cc_matches_scipy(mask, conn):
    ours = connected_components(mask, conn)
    structure = ndimage.generate_binary_structure(2, 1 if conn == 4 else 2)
    ref, n = ndimage.label(mask, structure=structure)
    assert ours.num_labels == n
    # scipy also numbers components in raster order of first pixel
    np.testing.assert_array_equal(ours.labels, ref)


@given(masks, st.sampled_from([4, 8]))
def test_cc_partition(mask, conn):
    lab = connected_components(mask, conn)
    assert ((lab.labels > 0) == mask).all()
    structure = ndimage.generate_binary_structure(2, 1 if conn == 4 else 2)
    for k in range(1, lab.num_labels + 1):
        comp = lab.labels == k
        _, n = ndimage.label(comp, structure=structure)
        assert n == 1
        grown = ndimage.binary_dilation(comp, structure=structure)
        assert set(np.unique(lab.labels[grown])) <= {0, k}


def test_cc_rejects_bad_connectivity():
    with pytest.raises(ConfigError):
        connected_components(np.ones((2, 2), bool), 6)


# -- reconstruction --------------------------------------------------------

def test_reconstruct_examples(rng):
    mask = rng.random((16, 16)) < 0.5
    assert not morphological_reconstruct(np.zeros_like(mask), mask).any()
    np.testing.assert_array_equal(morphological_reconstruct(mask, mask), mask)
    with pytest.raises(DimensionMismatchError):
        morphological_reconstruct(mask, mask[:3])


@given(masks, st.data())
def test_reconstruct_oracle_property(mask, data):
    marker = data.draw(arrays(bool, mask.shape)) & mask
    for conn in (4, 8):
        got = morphological_reconstruct(marker, mask, conn)
        np.testing.assert_array_equal(got, reconstruct_oracle(marker, mask, conn))
        assert not (got & ~mask).any()


@given(masks, st.data())
def test_reconstruct_monotone(mask, data):
    m1 = data.draw(arrays(bool, mask.shape)) & mask
    m2 = m1 | (data.draw(arrays(bool, mask.shape)) & mask)
    r1 = morphological_reconstruct(m1, mask)
    r2 = morphological_reconstruct(m2, mask)
    assert not (r1 & ~r2).any()


def test_remove_small_components():
    m = np.zeros((10, 10), bool)
    m[0, 0] = True
    m[5:8, 5:8] = True
    out = remove_small_components(m, 5)
    assert not out[0, 0] and out[5:8, 5:8].all()


# -- segmentation ----------------------------------------------------------

def test_segment_constant_is_empty():
    assert not segment_vasculature(np.full((64, 64), 100, np.uint8)).any()


def test_segment_noise_has_low_density():
    for seed in range(3):
        noise = np.random.default_rng(seed).integers(0, 256, size=(128, 128)).astype(np.uint8)
        density = segment_vasculature(median_filter(noise, 5)).mean()
        assert density < 0.02, density


def test_segment_synthetic_tree_dice():
    img, truth = generate_fundus(SynthParams(class_label=ClassLabel.NORMAL, seed=11))
    assert dice(segment_vasculature(preprocess(img)), truth.vessel_mask) >= 0.6


def test_segment_deterministic(fundus_samples):
    img, _ = fundus_samples[ClassLabel.DRUSEN]
    g = preprocess(img)
    np.testing.assert_array_equal(segment_vasculature(g), segment_vasculature(g))


def test_dice_examples():
    a = np.array([1, 1, 0, 0], bool)
    assert dice(a, a) == 1.0
    assert dice(a, ~a) == 0.0
    assert dice(np.zeros(3, bool), np.zeros(3, bool)) == 1.0
