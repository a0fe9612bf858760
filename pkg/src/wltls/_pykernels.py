"""Pure-Python/numpy twins of the compiled kernels in ``_ckernels.pyx``."""
from __future__ import annotations

import numpy as np


def arow_train_edge(indptr, indices, values, y, order, r, mean, var):
    updates = 0
    for epoch in order:
        for s in epoch:
            lo, hi = indptr[s], indptr[s + 1]
            idx = indices[lo:hi]
            x = values[lo:hi]
            label = float(y[s])
            margin = label * float(mean[idx] @ x)
            if margin >= 1.0:
                continue
            vx = var[idx] * x
            beta = 1.0 / (float(vx @ x) + r)
            alpha = (1.0 - margin) * beta
            mean[idx] += alpha * label * vx
            var[idx] -= beta * vx * vx
            updates += 1
    return updates


def _viterbi_one(w, tails, heads, rank_offset, n_vertices):
    # Plain-float loop: for a single query it beats the vectorised form,
    # whose per-edge numpy overhead dominates at this size.
    inf = float("inf")
    dist = [inf] * n_vertices
    dist[0] = 0.0
    pred = [-1] * n_vertices
    for e, (t, h, we) in enumerate(zip(tails, heads, w)):
        cand = dist[t] + we
        if cand < dist[h]:
            dist[h] = cand
            pred[h] = e
    index, v = 0, n_vertices - 1
    while v != 0:
        e = pred[v]
        index += rank_offset[e]
        v = tails[e]
    return index, dist[n_vertices - 1]


def viterbi_batch(weights, tails, heads, rank_offset, n_vertices):
    n = weights.shape[0]
    if n == 1:
        index, total = _viterbi_one(weights[0].tolist(), tails.tolist(), heads.tolist(),
                                    rank_offset.tolist(), n_vertices)
        return np.array([index], dtype=np.int64), np.array([total])
    dist = np.full((n, n_vertices), np.inf)
    dist[:, 0] = 0.0
    pred = np.full((n, n_vertices), -1, dtype=np.int64)
    for e in range(weights.shape[1]):
        t, h = tails[e], heads[e]
        cand = dist[:, t] + weights[:, e]
        better = cand < dist[:, h]
        dist[better, h] = cand[better]
        pred[better, h] = e
    index = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    v = np.full(n, n_vertices - 1, dtype=np.int64)
    while np.any(v != 0):
        live = v != 0
        e = pred[rows[live], v[live]]
        index[live] += rank_offset[e]
        v[live] = tails[e]
    return index, dist[:, n_vertices - 1].copy()
