# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: multinomial logistic SGD and batch softmax scoring.

Keep the arithmetic and its order in lockstep with ``pure.py``; the two
backends must produce identical weights and scores.
"""

from libc.math cimport exp, log

import numpy as np


def sgd_epochs(long[::1] indptr, long[::1] indices, double[::1] data, long[::1] y,
               double[:, ::1] weights, double lr, long[:, ::1] orders):
    cdef Py_ssize_t n_classes = weights.shape[0]
    cdef Py_ssize_t n_epochs = orders.shape[0]
    cdef Py_ssize_t n_rows = orders.shape[1]
    cdef double[::1] z = np.empty(n_classes, dtype=np.float64)
    cdef double[::1] ez = np.empty(n_classes, dtype=np.float64)
    cdef Py_ssize_t e_i, t, i, c, k, yy
    cdef long a, b
    cdef double acc, m, s, g, coef, total
    losses = []

    for e_i in range(n_epochs):
        total = 0.0
        for t in range(n_rows):
            i = orders[e_i, t]
            a = indptr[i]
            b = indptr[i + 1]
            for c in range(n_classes):
                acc = 0.0
                for k in range(a, b):
                    acc += weights[c, indices[k]] * data[k]
                z[c] = acc
            m = z[0]
            for c in range(1, n_classes):
                if z[c] > m:
                    m = z[c]
            s = 0.0
            for c in range(n_classes):
                ez[c] = exp(z[c] - m)
                s += ez[c]
            yy = y[i]
            total += log(s) - (z[yy] - m)
            for c in range(n_classes):
                g = ez[c] / s - (1.0 if c == yy else 0.0)
                coef = lr * g
                for k in range(a, b):
                    weights[c, indices[k]] -= coef * data[k]
        losses.append(total / n_rows if n_rows else 0.0)
    return losses


def score_rows(long[::1] indptr, long[::1] indices, double[::1] data,
               double[:, ::1] weights, double[:, ::1] out):
    cdef Py_ssize_t n_classes = weights.shape[0]
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef double[::1] z = np.empty(n_classes, dtype=np.float64)
    cdef double[::1] ez = np.empty(n_classes, dtype=np.float64)
    cdef Py_ssize_t i, c, k
    cdef long a, b
    cdef double acc, m, s

    for i in range(n_rows):
        a = indptr[i]
        b = indptr[i + 1]
        for c in range(n_classes):
            acc = 0.0
            for k in range(a, b):
                acc += weights[c, indices[k]] * data[k]
            z[c] = acc
        m = z[0]
        for c in range(1, n_classes):
            if z[c] > m:
                m = z[c]
        s = 0.0
        for c in range(n_classes):
            ez[c] = exp(z[c] - m)
            s += ez[c]
        for c in range(n_classes):
            out[i, c] = ez[c] / s
