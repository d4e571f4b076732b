"""Pure-Python kernel fallback.

Mirrors the compiled kernels operation-for-operation (same accumulation
order, same softmax stabilization) so both backends produce identical
weights and scores. Sparse rows are CSR-style: example i owns
indices[indptr[i]:indptr[i+1]] and data[indptr[i]:indptr[i+1]].
"""

from __future__ import annotations

import math


def sgd_epochs(indptr, indices, data, y, weights, lr, orders):
    """Run multinomial logistic SGD epochs in the given visit orders.

    ``weights`` is a (n_classes, dim) float64 array, updated in place.
    Returns the mean cross-entropy loss of each epoch.
    """
    n_classes = weights.shape[0]
    ptr = indptr.tolist()
    idx = indices.tolist()
    val = data.tolist()
    ylist = y.tolist()
    lr = float(lr)

    # sparse per-class weight maps; absent key == 0.0
    rows, cols = weights.nonzero()
    w = [dict() for _ in range(n_classes)]
    for r, c in zip(rows.tolist(), cols.tolist()):
        w[r][c] = float(weights[r, c])

    losses = []
    for order in orders:
        total = 0.0
        count = 0
        for i in order.tolist():
            a, b = ptr[i], ptr[i + 1]
            z = []
            for c in range(n_classes):
                wc = w[c]
                acc = 0.0
                for k in range(a, b):
                    acc += wc.get(idx[k], 0.0) * val[k]
                z.append(acc)
            m = z[0]
            for c in range(1, n_classes):
                if z[c] > m:
                    m = z[c]
            s = 0.0
            ez = []
            for c in range(n_classes):
                e = math.exp(z[c] - m)
                ez.append(e)
                s += e
            yy = ylist[i]
            total += math.log(s) - (z[yy] - m)
            count += 1
            for c in range(n_classes):
                g = ez[c] / s - (1.0 if c == yy else 0.0)
                coef = lr * g
                wc = w[c]
                for k in range(a, b):
                    j = idx[k]
                    wc[j] = wc.get(j, 0.0) - coef * val[k]
        losses.append(total / count if count else 0.0)

    weights[:] = 0.0
    for c in range(n_classes):
        for j, v in w[c].items():
            weights[c, j] = v
    return losses


def score_rows(indptr, indices, data, weights, out):
    """Fill ``out`` (n_rows, n_classes) with softmax scores per row."""
    n_classes = weights.shape[0]
    ptr = indptr.tolist()
    idx = indices.tolist()
    val = data.tolist()

    rows, cols = weights.nonzero()
    w = [dict() for _ in range(n_classes)]
    for r, c in zip(rows.tolist(), cols.tolist()):
        w[r][c] = float(weights[r, c])

    for i in range(len(ptr) - 1):
        a, b = ptr[i], ptr[i + 1]
        z = []
        for c in range(n_classes):
            wc = w[c]
            acc = 0.0
            for k in range(a, b):
                acc += wc.get(idx[k], 0.0) * val[k]
            z.append(acc)
        m = z[0]
        for c in range(1, n_classes):
            if z[c] > m:
                m = z[c]
        s = 0.0
        ez = []
        for c in range(n_classes):
            e = math.exp(z[c] - m)
            ez.append(e)
            s += e
        for c in range(n_classes):
            out[i, c] = ez[c] / s
