"""Accuracy, weighted F1 and mean test loss, computed from a confusion matrix where possible."""
from __future__ import annotations

import numpy as np

from .data import Dataset
from .models import Model, logits, log_softmax


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """``cm[i, j]`` counts samples of true class ``i`` predicted as ``j``."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"label arrays differ in shape: {y_true.shape} vs {y_pred.shape}")
    for arr in (y_true, y_pred):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"labels must lie in [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def _validate(cm) -> np.ndarray:
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    if (cm < 0).any():
        raise ValueError("confusion matrix entries must be non-negative")
    if cm.sum() <= 0:
        raise ValueError("confusion matrix is empty")
    return cm


def accuracy(cm) -> float:
    cm = _validate(cm)
    return float(np.trace(cm) / cm.sum())


def per_class_f1(cm) -> np.ndarray:
    """F1 per class; precision, recall or F1 with a zero denominator count as 0."""
    cm = _validate(cm).astype(np.float64)
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    support = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        return np.where(denom > 0, 2 * precision * recall / denom, 0.0)


def weighted_f1(cm) -> float:
    """Per-class F1 averaged with weights proportional to true-class support."""
    cm = _validate(cm)
    support = cm.sum(axis=1).astype(np.float64)
    return float(np.dot(per_class_f1(cm), support) / support.sum())


def predict(model: Model, dataset: Dataset, batch_size: int = 1024) -> np.ndarray:
    out = np.empty(len(dataset), dtype=np.int64)
    for start in range(0, len(dataset), batch_size):
        out[start:start + batch_size] = logits(model, dataset.features[start:start + batch_size]).argmax(axis=1)
    return out


def mean_loss(model: Model, dataset: Dataset, batch_size: int = 1024) -> float:
    """Mean cross-entropy over the whole dataset.

    Per-sample losses are gathered first and averaged once, so the result
    does not depend on ``batch_size``.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    losses = np.empty(len(dataset))
    for start in range(0, len(dataset), batch_size):
        sl = slice(start, start + batch_size)
        lp = log_softmax(logits(model, dataset.features[sl]))
        losses[sl] = -lp[np.arange(lp.shape[0]), dataset.labels[sl]]
    return float(losses.mean())


def evaluate(model: Model, dataset: Dataset, batch_size: int = 1024) -> dict:
    """Loss, accuracy and weighted F1 on ``dataset`` in one pass over predictions."""
    cm = confusion_matrix(dataset.labels, predict(model, dataset, batch_size), dataset.n_classes)
    return {
        "loss": mean_loss(model, dataset, batch_size),
        "accuracy": accuracy(cm),
        "f1": weighted_f1(cm),
    }
