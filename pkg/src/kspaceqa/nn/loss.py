"""Softmax cross-entropy over class logits."""

import numpy as np


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch.

    Returns (loss, grad) with grad = (softmax - onehot) / batch, matching
    the logits' dtype.
    """
    logits = np.asarray(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise ValueError(f"expected (B, classes) logits, got {logits.shape}")
    batch, n_classes = logits.shape
    if labels.shape != (batch,):
        raise ValueError("labels must be one class index per batch row")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError("label out of range")
    p = softmax(logits.astype(np.float64))
    rows = np.arange(batch)
    loss = float(-np.log(np.maximum(p[rows, labels], 1e-300)).mean())
    grad = p
    grad[rows, labels] -= 1.0
    grad /= batch
    return loss, grad.astype(logits.dtype)
