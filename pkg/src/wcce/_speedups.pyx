# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched loss kernels.

Mirrors the semantics of ``wcce._kernels_py`` (the NumPy reference); see that
module for the shared numerical conventions. Shapes are (batch, classes),
float64, C-ordered; inputs are converted if needed.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

NAME = "compiled"
PROB_CLIP = 1e-12

cdef double CLIP = 1e-12


cdef inline cnp.ndarray _as_c2d(object arr):
    return np.ascontiguousarray(arr, dtype=np.float64)


def softmax(object logits):
    """Row-wise softmax of a (m, n) logit matrix."""
    a = _as_c2d(logits)
    out = np.empty_like(a)
    cdef const double[:, ::1] z = a
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, m = z.shape[0], n = z.shape[1]
    cdef double mx, s
    for i in range(m):
        mx = z[i, 0]
        for j in range(1, n):
            if z[i, j] > mx:
                mx = z[i, j]
        s = 0.0
        for j in range(n):
            o[i, j] = exp(z[i, j] - mx)
            s += o[i, j]
        for j in range(n):
            o[i, j] = o[i, j] / s
    return out


def wcce_loss(object weight_rows, object probs):
    """Per-sample weighted cross-entropy: -sum_j w[i,j] * log(clip(p[i,j]))."""
    wa = _as_c2d(weight_rows)
    pa = _as_c2d(probs)
    cdef const double[:, ::1] w = wa
    cdef const double[:, ::1] p = pa
    cdef Py_ssize_t i, j, m = w.shape[0], n = w.shape[1]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc, cp
    for i in range(m):
        acc = 0.0
        for j in range(n):
            cp = p[i, j]
            if cp < CLIP:
                cp = CLIP
            acc += w[i, j] * log(cp)
        o[i] = -acc
    return out


def wcce_grad(object weight_rows, object probs):
    """Per-sample gradient wrt logits: p[i,j] * sum_k(w[i,k]) - w[i,j]."""
    wa = _as_c2d(weight_rows)
    pa = _as_c2d(probs)
    cdef const double[:, ::1] w = wa
    cdef const double[:, ::1] p = pa
    cdef Py_ssize_t i, j, m = w.shape[0], n = w.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += w[i, j]
        for j in range(n):
            o[i, j] = p[i, j] * s - w[i, j]
    return out


def cce_loss(object probs, object labels):
    """Vanilla categorical cross-entropy, hard-coded (no weight matrix)."""
    pa = _as_c2d(probs)
    ya = np.ascontiguousarray(labels, dtype=np.int64)
    cdef const double[:, ::1] p = pa
    cdef const cnp.int64_t[::1] y = ya
    cdef Py_ssize_t i, m = p.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double cp
    for i in range(m):
        cp = p[i, y[i]]
        if cp < CLIP:
            cp = CLIP
        o[i] = -log(cp)
    return out


def cce_grad(object probs, object labels):
    """Vanilla CCE gradient wrt logits: p - onehot(y)."""
    pa = _as_c2d(probs)
    ya = np.ascontiguousarray(labels, dtype=np.int64)
    out = pa.copy()
    cdef double[:, ::1] o = out
    cdef const cnp.int64_t[::1] y = ya
    cdef Py_ssize_t i, m = o.shape[0]
    for i in range(m):
        o[i, y[i]] = o[i, y[i]] - 1.0
    return out
