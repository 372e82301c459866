"""Pure NumPy implementations of the batched loss kernels.

These are the reference semantics for the compiled extension
(``wcce._speedups``); ``wcce.backend`` picks one of the two at import time.
All kernels take C-ordered float64 2-D arrays of shape (batch, classes).

Numerical conventions shared by both implementations:

* probabilities are clipped to ``PROB_CLIP`` before ``log`` so the loss is
  finite everywhere;
* a zero weight contributes exactly 0.0 to the loss, never NaN;
* ``softmax`` subtracts the row maximum before exponentiating.
"""

from __future__ import annotations

import numpy as np

NAME = "python"
PROB_CLIP = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a (m, n) logit matrix."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def wcce_loss(weight_rows: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Per-sample weighted cross-entropy: -sum_j w[i,j] * log(clip(p[i,j]))."""
    w = np.asarray(weight_rows, dtype=np.float64)
    clipped = np.maximum(np.asarray(probs, dtype=np.float64), PROB_CLIP)
    return -(w * np.log(clipped)).sum(axis=-1)


def wcce_grad(weight_rows: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Per-sample gradient wrt logits: p[i,j] * sum_k(w[i,k]) - w[i,j]."""
    w = np.asarray(weight_rows, dtype=np.float64)
    p = np.asarray(probs, dtype=np.float64)
    row_sums = w.sum(axis=-1, keepdims=True)
    return p * row_sums - w


def cce_loss(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vanilla categorical cross-entropy, hard-coded (no weight matrix)."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    picked = p[np.arange(p.shape[0]), y]
    return -np.log(np.maximum(picked, PROB_CLIP))


def cce_grad(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vanilla CCE gradient wrt logits: p - onehot(y)."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    g = p.copy()
    g[np.arange(p.shape[0]), y] -= 1.0
    return g
