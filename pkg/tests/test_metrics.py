import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.metrics import f1_score

from nirmal.data import Dataset
from nirmal.metrics import accuracy, confusion_matrix, evaluate, mean_loss, per_class_f1, weighted_f1
from nirmal.models import Arch, Model


def test_accuracy_cases():
    assert accuracy(np.diag([3, 4, 5])) == 1.0
    assert accuracy(np.array([[0, 2], [3, 0]])) == 0.0
    assert accuracy(np.array([[2, 1], [1, 1]])) == pytest.approx(0.6, abs=1e-15)


def test_weighted_f1_hand_case():
    # class A: support 3, TP 2, FN 1 (predicted B); class B: support 1, TP 1
    cm = np.array([[2, 1], [0, 1]])
    np.testing.assert_allclose(per_class_f1(cm), [0.8, 2 / 3], rtol=1e-15)
    assert weighted_f1(cm) == pytest.approx((3 * 0.8 + 2 / 3) / 4, abs=1e-15)
    assert weighted_f1(cm) == pytest.approx(0.766667, abs=1e-6)
    y_true, y_pred = [0, 0, 0, 1], [0, 0, 1, 1]
    assert weighted_f1(cm) == pytest.approx(f1_score(y_true, y_pred, average="weighted"), abs=1e-12)


def test_perfect_predictions():
    assert weighted_f1(np.diag([5, 1, 9])) == 1.0


def test_zero_support_class_has_no_weight():
    cm = np.array([[3, 1, 0], [0, 2, 0], [0, 0, 0]])
    two = np.array([[3, 1], [0, 2]])
    assert weighted_f1(cm) == pytest.approx(weighted_f1(two), abs=1e-15)


def test_empty_matrix_rejected():
    for fn in (accuracy, weighted_f1):
        with pytest.raises(ValueError):
            fn(np.zeros((3, 3), dtype=int))


def test_confusion_matrix_orientation():
    cm = confusion_matrix([0, 0, 1, 2], [1, 0, 1, 1], 3)
    np.testing.assert_array_equal(cm, [[1, 1, 0], [0, 1, 0], [0, 1, 0]])


cms = arrays(np.int64, st.tuples(st.integers(2, 5)).map(lambda t: (t[0], t[0])), elements=st.integers(0, 20)).filter(
    lambda m: m.sum() > 0
)


@settings(max_examples=150, deadline=None)
@given(cms)
def test_matches_sklearn(cm):
    k = cm.shape[0]
    y_true = np.repeat(np.repeat(np.arange(k), k), cm.ravel())
    y_pred = np.repeat(np.tile(np.arange(k), k), cm.ravel())
    ref = f1_score(y_true, y_pred, labels=np.arange(k), average="weighted", zero_division=0)
    assert weighted_f1(cm) == pytest.approx(ref, abs=1e-12)
    assert 0.0 <= weighted_f1(cm) <= 1.0


@settings(max_examples=100, deadline=None)
@given(cms, st.randoms(use_true_random=False))
def test_permutation_invariance(cm, rnd):
    perm = list(range(cm.shape[0]))
    rnd.shuffle(perm)
    permuted = cm[np.ix_(perm, perm)]
    assert weighted_f1(permuted) == pytest.approx(weighted_f1(cm), abs=1e-12)
    assert accuracy(permuted) == pytest.approx(accuracy(cm), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(arrays(np.int64, st.integers(1, 6), elements=st.integers(1, 30)))
def test_diagonal_is_perfect(d):
    cm = np.diag(d)
    assert accuracy(cm) == 1.0 and weighted_f1(cm) == 1.0


def test_mean_loss_uniform_logits():
    ds = Dataset(np.random.default_rng(0).uniform(size=(37, 4)), np.arange(37) % 10, 10)
    model = Model(Arch(4, 10), np.zeros(50))
    assert mean_loss(model, ds) == pytest.approx(math.log(10), abs=1e-12)


def test_mean_loss_batch_independent():
    rng = np.random.default_rng(1)
    ds = Dataset(rng.uniform(size=(300, 8)), rng.integers(0, 4, 300), 4)
    model = Model.create(Arch(8, 4, 6), seed=2)
    full = mean_loss(model, ds, batch_size=300)
    for bs in (1, 7, 64):
        assert mean_loss(model, ds, batch_size=bs) == pytest.approx(full, abs=1e-12)


def test_mean_loss_confident_correct():
    ds = Dataset(np.array([[1.0]]), np.array([1]), 2)
    model = Model(Arch(1, 2), np.array([-50.0, 50.0, 0.0, 0.0]))
    assert mean_loss(model, ds) == pytest.approx(0.0, abs=1e-40)


def test_evaluate_keys():
    ds = Dataset(np.eye(3), np.arange(3), 3)
    model = Model(Arch(3, 3), np.concatenate([np.eye(3).ravel() * 10, np.zeros(3)]))
    ev = evaluate(model, ds)
    assert ev["accuracy"] == 1.0 and ev["f1"] == 1.0 and ev["loss"] < 1e-3
