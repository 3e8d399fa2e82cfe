"""Small classifiers with hand-written backprop: multinomial logistic regression and a tanh MLP.

Parameters live in one flat float64 vector so every optimizer can treat a
model like any other objective. Layouts (row-major blocks, in order):

* logistic regression: ``W (d, K)``, ``b (K,)``
* MLP: ``W1 (d, H)``, ``b1 (H,)``, ``W2 (H, K)``, ``b2 (K,)``
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .core import DimensionError
from .data import Dataset


@dataclass(frozen=True)
class Arch:
    """``hidden_dim=None`` means logistic regression."""

    input_dim: int
    n_classes: int
    hidden_dim: Optional[int] = None

    def __post_init__(self):
        if self.input_dim < 1 or self.n_classes < 2:
            raise ValueError(f"need input_dim >= 1 and n_classes >= 2, got {self}")
        if self.hidden_dim is not None and self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")

    @property
    def kind(self) -> str:
        return "logreg" if self.hidden_dim is None else "mlp"

    def shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        d, k, h = self.input_dim, self.n_classes, self.hidden_dim
        if h is None:
            return [("W", (d, k)), ("b", (k,))]
        return [("W1", (d, h)), ("b1", (h,)), ("W2", (h, k)), ("b2", (k,))]

    @property
    def n_params(self) -> int:
        return sum(int(np.prod(s)) for _, s in self.shapes())

    def unflatten(self, params: np.ndarray) -> Dict[str, np.ndarray]:
        """Views into ``params`` keyed by block name."""
        if params.shape != (self.n_params,):
            raise DimensionError(f"{self.kind} needs {self.n_params} params, got {params.shape}")
        out, pos = {}, 0
        for name, shape in self.shapes():
            size = int(np.prod(shape))
            out[name] = params[pos:pos + size].reshape(shape)
            pos += size
        return out


@dataclass
class Model:
    arch: Arch
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        if self.params.shape != (self.arch.n_params,):
            raise DimensionError(
                f"{self.arch.kind} needs {self.arch.n_params} params, got {self.params.shape}"
            )

    @classmethod
    def create(cls, arch: Arch, seed: int = 0) -> "Model":
        return cls(arch, init_params(arch, seed))


def init_params(arch: Arch, seed: int = 0) -> np.ndarray:
    """Glorot-uniform weights ``U(-s, s)``, ``s = sqrt(6 / (fan_in + fan_out))``; zero biases."""
    rng = np.random.default_rng(seed)
    blocks = []
    for name, shape in arch.shapes():
        if len(shape) == 2:
            s = np.sqrt(6.0 / (shape[0] + shape[1]))
            blocks.append(rng.uniform(-s, s, size=shape).ravel())
        else:
            blocks.append(np.zeros(shape))
    return np.concatenate(blocks)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, labels) -> float:
    """Mean negative log-likelihood of ``labels`` under ``softmax(logits)``."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    labels = np.asarray(labels)
    lp = log_softmax(logits)
    return float(-lp[np.arange(labels.shape[0]), labels].mean())


def _check_batch(dataset: Dataset, batch) -> np.ndarray:
    idx = np.asarray(batch, dtype=np.int64).ravel()
    if idx.shape[0] == 0:
        raise ValueError("empty batch")
    if idx.min() < 0 or idx.max() >= len(dataset):
        raise IndexError(f"batch indices must lie in [0, {len(dataset)})")
    if np.unique(idx).shape[0] != idx.shape[0]:
        raise ValueError("batch indices must be unique")
    return idx


def _forward(arch: Arch, params: np.ndarray, x: np.ndarray):
    p = arch.unflatten(params)
    if arch.hidden_dim is None:
        return x @ p["W"] + p["b"], None
    hidden = np.tanh(x @ p["W1"] + p["b1"])
    return hidden @ p["W2"] + p["b2"], hidden


def logits(model: Model, features) -> np.ndarray:
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    return _forward(model.arch, model.params, x)[0]


def forward_loss(model: Model, dataset: Dataset, batch) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy over ``batch`` and the ``(b, K)`` logits."""
    idx = _check_batch(dataset, batch)
    z = logits(model, dataset.features[idx])
    return cross_entropy(z, dataset.labels[idx]), z


def loss_and_grad(arch: Arch, params: np.ndarray, x: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    """Loss and exact gradient for raw arrays; the workhorse behind :func:`backward`."""
    z, hidden = _forward(arch, params, x)
    lp = log_softmax(z)
    b = y.shape[0]
    rows = np.arange(b)
    loss = -lp[rows, y].mean()

    dz = np.exp(lp)
    dz[rows, y] -= 1.0
    dz /= b

    p = arch.unflatten(params)
    grad = np.empty_like(params)
    g = arch.unflatten(grad)
    if hidden is None:
        g["W"][...] = x.T @ dz
        g["b"][...] = dz.sum(axis=0)
    else:
        g["W2"][...] = hidden.T @ dz
        g["b2"][...] = dz.sum(axis=0)
        dpre = (dz @ p["W2"].T) * (1.0 - hidden ** 2)
        g["W1"][...] = x.T @ dpre
        g["b1"][...] = dpre.sum(axis=0)
    return float(loss), grad


def backward(model: Model, dataset: Dataset, batch) -> np.ndarray:
    """Gradient of :func:`forward_loss` with respect to ``model.params``."""
    idx = _check_batch(dataset, batch)
    return loss_and_grad(model.arch, model.params, dataset.features[idx], dataset.labels[idx])[1]


def batch_objective(model: Model, dataset: Dataset, batch):
    """``params -> (loss, grad)`` on a fixed batch, for :func:`nirmal.objectives.fd_check`."""
    idx = _check_batch(dataset, batch)
    x, y = dataset.features[idx], dataset.labels[idx]
    return lambda params: loss_and_grad(model.arch, np.asarray(params, dtype=np.float64), x, y)


def epoch_batches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Shuffle ``range(n)`` with ``rng`` and yield consecutive batches; the last may be short."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
