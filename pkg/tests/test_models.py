import math

import numpy as np
import pytest

from nirmal.core import DimensionError
from nirmal.data import Dataset
from nirmal.models import (
    Arch,
    Model,
    backward,
    batch_objective,
    cross_entropy,
    epoch_batches,
    forward_loss,
    init_params,
)
from nirmal.objectives import fd_check


def test_param_counts():
    assert Arch(784, 10).n_params == 7850
    assert Arch(784, 10, 64).n_params == 784 * 64 + 64 + 64 * 10 + 10
    with pytest.raises(DimensionError):
        Model(Arch(3, 2), np.zeros(7))


def test_uniform_logits_give_log_k():
    ds = Dataset(np.zeros((4, 3)), np.array([0, 1, 0, 1]), 2)
    model = Model(Arch(3, 2), np.zeros(8))
    loss, z = forward_loss(model, ds, [0, 1, 2, 3])
    assert loss == pytest.approx(math.log(2), abs=1e-15)
    np.testing.assert_array_equal(z, 0.0)


def test_stable_for_huge_logits():
    assert cross_entropy(np.array([[1000.0, 0.0]]), np.array([0])) == pytest.approx(0.0, abs=1e-300)
    assert cross_entropy(np.array([[0.0, 1000.0]]), np.array([0])) == pytest.approx(1000.0)


def test_empty_batch_rejected(tiny_dataset):
    model = Model.create(Arch(5, 3))
    with pytest.raises(ValueError):
        forward_loss(model, tiny_dataset, [])
    with pytest.raises(ValueError):
        backward(model, tiny_dataset, [])
    with pytest.raises(ValueError):
        forward_loss(model, tiny_dataset, [1, 1])
    with pytest.raises(IndexError):
        forward_loss(model, tiny_dataset, [12])


def test_symmetric_batch_zero_bias_gradient():
    x = np.array([[0.3, -1.2], [-0.3, 1.2]])
    ds = Dataset(x, np.array([0, 1]), 2)
    grad = backward(Model(Arch(2, 2), np.zeros(6)), ds, [0, 1])
    np.testing.assert_allclose(grad[-2:], 0.0, atol=1e-17)


def test_logreg_gradient_closed_form(tiny_dataset):
    model = Model.create(Arch(5, 3), seed=3)
    idx = np.arange(12)
    _, z = forward_loss(model, tiny_dataset, idx)
    p = np.exp(z - z.max(1, keepdims=True))
    p /= p.sum(1, keepdims=True)
    p[idx, tiny_dataset.labels] -= 1
    x = tiny_dataset.features
    expected = np.concatenate([(x.T @ p / 12).ravel(), p.sum(0) / 12])
    np.testing.assert_allclose(backward(model, tiny_dataset, idx), expected, rtol=1e-13, atol=1e-16)


def test_mlp_hand_chain_rule():
    # d=1, H=1, K=2, x=1, label 0
    a, u1, u2 = 0.5, 0.3, -0.2
    params = np.array([a, 0.0, u1, u2, 0.0, 0.0])
    ds = Dataset(np.array([[1.0]]), np.array([0]), 2)
    model = Model(Arch(1, 2, 1), params)
    h = math.tanh(a)
    delta = u2 - u1
    s = 1.0 / (1.0 + math.exp(-delta * h))
    loss, _ = forward_loss(model, ds, [0])
    assert loss == pytest.approx(math.log1p(math.exp(delta * h)), rel=1e-14)
    dpre = s * delta * (1 - h * h)
    expected = [dpre, dpre, -s * h, s * h, -s, s]
    np.testing.assert_allclose(backward(model, ds, [0]), expected, rtol=1e-13)


@pytest.mark.parametrize("hidden", [None, 4])
def test_gradient_matches_finite_differences(hidden):
    rng = np.random.default_rng(11)
    for trial in range(20):
        d, k, n = rng.integers(1, 7), rng.integers(2, 5), rng.integers(1, 9)
        ds = Dataset(rng.uniform(0, 1, (n, d)), rng.integers(0, k, n), int(k))
        model = Model(Arch(int(d), int(k), hidden), rng.normal(scale=0.8, size=Arch(int(d), int(k), hidden).n_params))
        batch = rng.choice(n, size=rng.integers(1, n + 1), replace=False)
        assert fd_check(batch_objective(model, ds, batch), model.params, h=1e-6) < 1e-5, trial


def test_init_deterministic_and_biases_zero():
    arch = Arch(30, 10, 20)
    a, b = init_params(arch, 5), init_params(arch, 5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, init_params(arch, 6))
    blocks = arch.unflatten(a)
    assert (blocks["b1"] == 0).all() and (blocks["b2"] == 0).all()


def test_init_glorot_spread():
    arch = Arch(100, 100)
    w = arch.unflatten(init_params(arch, 0))["W"]
    s = math.sqrt(6 / 200)
    assert w.size == 10_000
    assert np.abs(w).max() <= s
    assert abs(w.std() - s / math.sqrt(3)) < 0.1 * s / math.sqrt(3)


def test_loss_non_negative(tiny_dataset):
    rng = np.random.default_rng(0)
    for _ in range(10):
        model = Model(Arch(5, 3, 3), rng.normal(scale=3, size=Arch(5, 3, 3).n_params))
        loss, _ = forward_loss(model, tiny_dataset, np.arange(12))
        assert loss >= 0


def test_epoch_batches_deterministic_and_complete():
    a = [b.tolist() for b in epoch_batches(10, 4, np.random.default_rng(1))]
    b = [b.tolist() for b in epoch_batches(10, 4, np.random.default_rng(1))]
    assert a == b
    assert [len(x) for x in a] == [4, 4, 2]
    assert sorted(sum(a, [])) == list(range(10))
