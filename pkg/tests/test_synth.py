import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from retinadx.errors import ConfigError
from retinadx.labels import ClassLabel
from retinadx.synth import SynthParams, generate_fundus
from retinadx.vessel_seg import connected_components

classes = st.sampled_from(list(ClassLabel))
seeds = st.integers(0, 10_000)


def test_deterministic():
    p = SynthParams(class_label=ClassLabel.DRUSEN, seed=5)
    a, ta = generate_fundus(p)
    b, tb = generate_fundus(p)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(ta.vessel_mask, tb.vessel_mask)
    np.testing.assert_array_equal(ta.lesion_mask, tb.lesion_mask)
    assert ta.lesion_count == tb.lesion_count


def test_normal_has_no_lesions():
    for seed in range(5):
        _, t = generate_fundus(SynthParams(class_label=ClassLabel.NORMAL, seed=seed))
        assert not t.lesion_mask.any() and t.lesion_count == 0


@settings(max_examples=15)
@given(seeds)
def test_drusen_component_count(seed):
    p = SynthParams(class_label=ClassLabel.DRUSEN, seed=seed)
    _, t = generate_fundus(p)
    assert connected_components(t.lesion_mask, 8).num_labels == t.lesion_count
    assert p.drusen_count[0] <= t.lesion_count <= p.drusen_count[1]


@settings(max_examples=15)
@given(classes, seeds)
def test_vessel_tree_connected(label, seed):
    _, t = generate_fundus(SynthParams(class_label=label, seed=seed))
    assert connected_components(t.vessel_mask, 8).num_labels == 1


@settings(max_examples=10)
@given(st.sampled_from([ClassLabel.DRUSEN, ClassLabel.DIABETIC_RETINOPATHY]), seeds)
def test_lesion_contrast(label, seed):
    p = SynthParams(class_label=label, seed=seed)
    img, t = generate_fundus(p)
    g = img[..., 1].astype(np.float64)
    lab, n = ndimage.label(t.lesion_mask, structure=np.ones((3, 3)))
    assert n == t.lesion_count > 0
    for k in range(1, n + 1):
        comp = lab == k
        ring = (ndimage.binary_dilation(comp, iterations=8) & ~ndimage.binary_dilation(comp, iterations=5)
                & ~t.vessel_mask & ~t.lesion_mask & t.fov_mask)
        assert abs(g[comp].mean() - g[ring].mean()) >= p.lesion_contrast


def test_seed_changes_image():
    digests = {hashlib.sha256(generate_fundus(SynthParams(seed=s))[0].tobytes()).hexdigest() for s in range(10)}
    assert len(digests) == 10


def test_outside_fov_is_black():
    img, t = generate_fundus(SynthParams(seed=1))
    assert not img[~t.fov_mask].any()
    assert not (t.vessel_mask & ~t.fov_mask).any()


def test_dr_lesions_within_ranges():
    p = SynthParams(class_label=ClassLabel.DIABETIC_RETINOPATHY, seed=2)
    _, t = generate_fundus(p)
    lo = p.dot_count[0] + p.patch_count[0]
    hi = p.dot_count[1] + p.patch_count[1]
    assert lo <= t.lesion_count <= hi


def test_params_validation():
    with pytest.raises(ConfigError):
        SynthParams(size=32)
    with pytest.raises(ConfigError):
        SynthParams(drusen_count=(-1, 3))
    with pytest.raises(ConfigError):
        SynthParams(drusen_count=(5, 2))
