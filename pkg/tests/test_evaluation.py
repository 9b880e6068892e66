import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from retinadx.errors import DataError
from retinadx.evaluation import CLASSES, confusion_counts
from retinadx.labels import ClassLabel

N, DR, DRU = ClassLabel.NORMAL, ClassLabel.DIABETIC_RETINOPATHY, ClassLabel.DRUSEN


def test_perfect_predictions():
    truth = {f"i{k}": c for k, c in enumerate([N, DR, DRU, N])}
    cc = confusion_counts(truth, dict(truth))
    assert cc.accuracy == 1.0
    assert (cc.matrix == np.diag(np.diag(cc.matrix))).all()
    for c in CLASSES:
        o = cc.one_vs_rest(c)
        assert o.fp == 0 and o.fn == 0


def test_all_wrong_two_class_subset():
    truth = {"a": N, "b": N, "c": DR, "d": DR}
    pred = {"a": DR, "b": DR, "c": N, "d": N}
    cc = confusion_counts(truth, pred)
    for c in (N, DR):
        o = cc.one_vs_rest(c)
        assert o.tp == 0 and o.tn == 0


def test_hand_tally():
    truth = {"1": N, "2": N, "3": DR, "4": DR, "5": DRU, "6": DRU}
    pred = {"1": N, "2": DR, "3": DR, "4": DRU, "5": DRU, "6": N}
    cc = confusion_counts(truth, pred)
    assert cc.matrix.tolist() == [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    assert vars(cc.one_vs_rest(N)) == {"tp": 1, "tn": 3, "fp": 1, "fn": 1}
    assert vars(cc.one_vs_rest(DR)) == {"tp": 1, "tn": 3, "fp": 1, "fn": 1}
    assert vars(cc.one_vs_rest(DRU)) == {"tp": 1, "tn": 3, "fp": 1, "fn": 1}
    assert cc.accuracy == pytest.approx(0.5)


def test_id_mismatch():
    with pytest.raises(DataError):
        confusion_counts({"a": N}, {"b": N})


def test_labels_by_name():
    cc = confusion_counts({"a": "Drusen"}, {"a": "DiabeticRetinopathy"})
    assert cc.matrix[2, 1] == 1


@given(st.lists(st.tuples(st.sampled_from(CLASSES), st.sampled_from(CLASSES)), min_size=1, max_size=40))
def test_counts_invariants(pairs):
    truth = {str(i): t for i, (t, _) in enumerate(pairs)}
    pred = {str(i): p for i, (_, p) in enumerate(pairs)}
    cc = confusion_counts(truth, pred)
    assert cc.total == len(pairs)
    for c in CLASSES:
        o = cc.one_vs_rest(c)
        assert o.tp + o.tn + o.fp + o.fn == cc.total
    d = cc.to_dict()
    assert sum(map(sum, d["matrix"])) == len(pairs)
