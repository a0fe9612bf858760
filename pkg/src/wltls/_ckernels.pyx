# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: AROW epochs for one edge learner, batched Viterbi.

Signatures and semantics mirror ``wltls._pykernels`` exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def arow_train_edge(const cnp.int64_t[::1] indptr,
                    const cnp.int64_t[::1] indices,
                    const double[::1] values,
                    const signed char[::1] y,
                    const cnp.int64_t[:, ::1] order,
                    double r,
                    double[::1] mean,
                    double[::1] var):
    """Run ``order.shape[0]`` AROW epochs in place; returns the update count."""
    cdef Py_ssize_t n_epochs = order.shape[0]
    cdef Py_ssize_t m = order.shape[1]
    cdef Py_ssize_t ep, t, s, k, lo, hi
    cdef cnp.int64_t j
    cdef double margin, v, beta, alpha, x, vx, label
    cdef long updates = 0
    with nogil:
        for ep in range(n_epochs):
            for t in range(m):
                s = order[ep, t]
                lo = indptr[s]
                hi = indptr[s + 1]
                label = y[s]
                margin = 0.0
                for k in range(lo, hi):
                    margin += mean[indices[k]] * values[k]
                margin *= label
                if margin >= 1.0:
                    continue
                v = 0.0
                for k in range(lo, hi):
                    x = values[k]
                    v += var[indices[k]] * x * x
                beta = 1.0 / (v + r)
                alpha = (1.0 - margin) * beta
                for k in range(lo, hi):
                    j = indices[k]
                    vx = var[j] * values[k]
                    mean[j] += alpha * label * vx
                    var[j] -= beta * vx * vx
                updates += 1
    return updates


def viterbi_batch(const double[:, ::1] weights,
                  const cnp.int64_t[::1] tails,
                  const cnp.int64_t[::1] heads,
                  const cnp.int64_t[::1] rank_offset,
                  Py_ssize_t n_vertices):
    """Shortest source-to-sink path per row of ``weights``.

    Edges must be numbered topologically; ties keep the earlier edge.
    Returns (path index, path total) arrays.
    """
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t n_edges = weights.shape[1]
    cdef Py_ssize_t sink = n_vertices - 1
    cdef Py_ssize_t q, e, v
    cdef double cand
    cdef cnp.int64_t idx
    dist_arr = np.empty(n_vertices, dtype=np.float64)
    pred_arr = np.empty(n_vertices, dtype=np.int64)
    index_arr = np.empty(n, dtype=np.int64)
    total_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    cdef cnp.int64_t[::1] pred = pred_arr
    cdef cnp.int64_t[::1] index = index_arr
    cdef double[::1] total = total_arr
    with nogil:
        for q in range(n):
            for v in range(n_vertices):
                dist[v] = INFINITY
                pred[v] = -1
            dist[0] = 0.0
            for e in range(n_edges):
                cand = dist[tails[e]] + weights[q, e]
                if cand < dist[heads[e]]:
                    dist[heads[e]] = cand
                    pred[heads[e]] = e
            total[q] = dist[sink]
            idx = 0
            v = sink
            while v != 0:
                e = pred[v]
                idx += rank_offset[e]
                v = tails[e]
            index[q] = idx
    return index_arr, total_arr
