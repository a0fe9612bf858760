"""Loss-based decoding as a shortest path over the trellis.

Edge weights are chosen so that the weight of every class's path equals
that class's total codeword loss; the Viterbi pass then performs exact
loss-based decoding in time linear in the number of edges.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .assignment import ClassAssignment
from .data import SparseVector
from .learner import margins as _margins
from .losses import LOSS_CLAMP, LossKind, loss_values
from .trellis import TrellisGraph, code_matrix, index_to_path

EXHAUSTIVE_LIMIT = 1 << 16


@dataclass(frozen=True, eq=False)
class EdgeWeights:
    w: np.ndarray
    clamped: int = 0  # loss values saturated at LOSS_CLAMP


@dataclass(frozen=True)
class DecodeResult:
    class_id: int
    path: tuple[int, ...]
    total_loss: float
    path_index: int
    clamped: int = 0


def _depth_starts(graph: TrellisGraph) -> np.ndarray:
    # Edge numbering is slice-major, so the edges of each tail depth are a
    # contiguous run; reduceat then sums every run in a fixed order, which
    # keeps single-query and batched weights bitwise identical.
    return np.searchsorted(graph.tail_depth, np.arange(graph.depth_count))


def edge_weights(graph: TrellisGraph, margins, loss_kind=LossKind.EXPONENTIAL) -> EdgeWeights:
    """Per-edge decoding weights for one margin vector or a batch of rows.

    ``A[s]`` sums the "bit off" losses of all edges whose tail sits at depth
    ``s`` and ``B[s]`` is its suffix sum over depths ``>= s``.  A forward
    edge pays its own "bit on" loss plus ``A`` of its depth minus its own
    "bit off" term; a sink edge uses ``B`` instead, since nothing deeper
    can share its path.
    """
    f = np.asarray(margins, dtype=np.float64)
    if f.shape[-1] != graph.n_edges:
        raise ValueError(f"expected {graph.n_edges} margins, got {f.shape[-1]}")
    if not np.all(np.isfinite(f)):
        raise ValueError("margins must be finite")
    pos = loss_values(loss_kind, f)
    neg = loss_values(loss_kind, -f)
    clamped = int(np.count_nonzero(pos == LOSS_CLAMP) + np.count_nonzero(neg == LOSS_CLAMP))
    A = np.add.reduceat(neg, _depth_starts(graph), axis=-1)
    B = np.flip(np.cumsum(np.flip(A, -1), -1), -1)
    depth = graph.tail_depth
    group = np.where(graph.is_sink_edge, B[..., depth], A[..., depth])
    return EdgeWeights(pos - neg + group, clamped)


def _viterbi(graph: TrellisGraph, W: np.ndarray, kernel=None):
    kernel = kernel or kernels.viterbi_batch
    W = np.ascontiguousarray(W, dtype=np.float64)
    return kernel(W, graph.tails, graph.heads, graph.rank_offset, graph.n_vertices)


def shortest_path(graph: TrellisGraph, weights) -> tuple[list[int], float]:
    """Minimum-weight source-to-sink path; ties favour the earlier edge id."""
    w = weights.w if isinstance(weights, EdgeWeights) else np.asarray(weights, dtype=np.float64)
    if w.shape != (graph.n_edges,):
        raise ValueError(f"expected {graph.n_edges} weights, got shape {w.shape}")
    index, total = _viterbi(graph, w[None, :])
    return index_to_path(graph, int(index[0])), float(total[0])


def decode_margins(graph: TrellisGraph, assignment: ClassAssignment, margins,
                   loss_kind=LossKind.EXPONENTIAL) -> DecodeResult:
    ew = edge_weights(graph, margins, loss_kind)
    index, total = _viterbi(graph, ew.w[None, :])
    idx = int(index[0])
    return DecodeResult(assignment.class_of(idx), tuple(index_to_path(graph, idx)),
                        float(total[0]), idx, ew.clamped)


def decode(model, graph: TrellisGraph, assignment: ClassAssignment, x: SparseVector,
           loss_kind=LossKind.EXPONENTIAL) -> DecodeResult:
    """Predict the class of ``x`` by exact loss-based decoding."""
    return decode_margins(graph, assignment, _margins(model, x), loss_kind)


def decode_batch(graph: TrellisGraph, assignment: ClassAssignment, F: np.ndarray,
                 loss_kind=LossKind.EXPONENTIAL, chunk: int = 4096, threads: int = 1):
    """Decode every row of the margin matrix ``F``; returns (class ids, totals)."""
    F = np.asarray(F, dtype=np.float64)
    classes = np.empty(len(F), dtype=np.int64)
    totals = np.empty(len(F))

    def run(lo):
        ew = edge_weights(graph, F[lo:lo + chunk], loss_kind)
        index, total = _viterbi(graph, ew.w)
        classes[lo:lo + chunk] = assignment.inverse[index]
        totals[lo:lo + chunk] = total

    starts = range(0, len(F), chunk)
    if threads > 1 and len(F) > chunk:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return classes, totals


def class_code_matrix(graph: TrellisGraph, assignment: ClassAssignment) -> np.ndarray:
    """Coding matrix with row ``k`` the codeword of class ``k``."""
    return code_matrix(graph)[assignment.permutation]


def decode_exhaustive(graph: TrellisGraph, assignment: ClassAssignment, margins,
                      loss_kind=LossKind.EXPONENTIAL, limit: int = EXHAUSTIVE_LIMIT,
                      codes: np.ndarray | None = None) -> DecodeResult:
    """Literal argmin over all K codewords of the summed margin loss.

    Linear in K; kept as a reference.  ``codes`` may carry a precomputed
    :func:`class_code_matrix`.
    """
    if graph.K > limit:
        raise ValueError(f"K={graph.K} exceeds the exhaustive decoding limit {limit}")
    f = np.asarray(margins, dtype=np.float64)
    M = class_code_matrix(graph, assignment) if codes is None else codes
    totals = loss_values(loss_kind, M * f).sum(axis=1)
    k = int(np.argmin(totals))
    p = assignment.path_of(k)
    return DecodeResult(k, tuple(index_to_path(graph, p)), float(totals[k]), p)


def decode_heaviest(graph: TrellisGraph, margins,
                    assignment: ClassAssignment | None = None) -> DecodeResult:
    """Path maximising the summed raw margins.

    Without an assignment the returned ``class_id`` is the path index.
    ``total_loss`` holds the path's margin sum.
    """
    f = np.asarray(margins, dtype=np.float64)
    index, total = _viterbi(graph, -f[None, :])
    idx = int(index[0])
    cls = assignment.class_of(idx) if assignment is not None else idx
    return DecodeResult(cls, tuple(index_to_path(graph, idx)), -float(total[0]), idx)
