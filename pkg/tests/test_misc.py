import numpy as np
import pytest

from retinadx.config import PipelineConfig
from retinadx.errors import DataError
from retinadx.evaluation import confusion_counts
from retinadx.labels import ClassLabel
from retinadx.pipeline import overlay, process_image
from retinadx.plotting import plot_confusion, plot_segmentation, plot_training_curves


def test_label_parse():
    assert ClassLabel.parse("Drusen") is ClassLabel.DRUSEN
    assert ClassLabel.parse(np.int64(1)) is ClassLabel.DIABETIC_RETINOPATHY
    assert ClassLabel.DIABETIC_RETINOPATHY.display == "DiabeticRetinopathy"
    with pytest.raises(DataError):
        ClassLabel.parse("Glaucoma")
    with pytest.raises(DataError):
        ClassLabel.parse(7)


def test_overlay_colours():
    img = np.full((2, 2, 3), 100, np.uint8)
    v = np.array([[True, False], [False, False]])
    c = np.array([[False, True], [False, False]])
    out = overlay(img, v, c)
    assert out[0, 0].tolist() == [50, 178, 50]
    assert out[0, 1].tolist() == [178, 178, 50]
    assert out[1, 1].tolist() == [100, 100, 100]


def test_process_image_stages(fundus_samples):
    img, _ = fundus_samples[ClassLabel.NORMAL]
    res = process_image(img, PipelineConfig())
    assert res.classification is None
    assert set(res.timings) == {"preprocess", "segmentation", "edges", "features"}
    assert not (res.lesion_candidates & res.vessels).any()


def test_plots_are_reproducible(tmp_path):
    cc = confusion_counts({"a": 0, "b": 1, "c": 2}, {"a": 0, "b": 2, "c": 2})
    for k in range(2):
        plot_confusion(cc, tmp_path / f"c{k}.png")
        plot_training_curves({"Normal": [3.0, 2.0, 1.0]}, tmp_path / f"t{k}.png")
        plot_segmentation(np.zeros((8, 8, 3), np.uint8), np.zeros((8, 8)), np.zeros((8, 8), bool),
                          tmp_path / f"s{k}.png")
    for stem in "cts":
        assert (tmp_path / f"{stem}0.png").read_bytes() == (tmp_path / f"{stem}1.png").read_bytes()
