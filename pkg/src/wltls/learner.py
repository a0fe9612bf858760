"""Independent AROW learners, one per trellis edge."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .assignment import ClassAssignment
from .data import Dataset, SparseVector
from .trellis import TrellisGraph, index_to_path

log = logging.getLogger(__name__)


@dataclass
class ArowState:
    """Diagonal AROW learner: mean weights and per-feature variance."""

    mean: np.ndarray
    variance: np.ndarray
    r: float = 1.0

    @classmethod
    def zeros(cls, d: int, r: float = 1.0) -> "ArowState":
        if r <= 0:
            raise ValueError("r must be positive")
        return cls(np.zeros(d), np.ones(d), float(r))

    def margin(self, x: SparseVector) -> float:
        return x.dot(self.mean)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    r: float = 1.0
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True, eq=False)
class MarginModel:
    weights: np.ndarray  # (ell, d)

    @property
    def n_edges(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def margins(self, x: SparseVector) -> np.ndarray:
        return margins(self, x)


def arow_update(state: ArowState, x: SparseVector, y: int) -> ArowState:
    """One AROW step on ``(x, y)``; mutates and returns ``state``.

    Nothing changes when the margin already reaches 1.
    """
    idx, vals = x.indices, x.values
    m = y * float(state.mean[idx] @ vals)
    if m >= 1.0:
        return state
    vx = state.variance[idx] * vals
    beta = 1.0 / (float(vx @ vals) + state.r)
    alpha = (1.0 - m) * beta
    state.mean[idx] += alpha * y * vx
    state.variance[idx] -= beta * vx * vx
    return state


def binary_label(assignment: ClassAssignment, graph: TrellisGraph,
                 class_id: int, edge_id: int) -> int:
    """Codeword bit of ``class_id`` at ``edge_id``, found by walking its path."""
    return 1 if edge_id in index_to_path(graph, assignment.path_of(class_id)) else -1


def edge_class_table(assignment: ClassAssignment, graph: TrellisGraph) -> list[np.ndarray]:
    """For each edge, the sorted class ids whose path uses it."""
    users: list[list[int]] = [[] for _ in range(graph.n_edges)]
    for k, path in enumerate(assignment.class_paths(graph)):
        for e in path:
            users[e].append(k)
    return [np.asarray(u, dtype=np.int64) for u in users]


def epoch_orders(m: int, epochs: int, seed: int, edge_id: int) -> np.ndarray:
    """Per-epoch sample orders for one learner; a stream of its own."""
    orders = np.empty((epochs, m), dtype=np.int64)
    for ep in range(epochs):
        rng = np.random.default_rng(np.random.SeedSequence([seed, edge_id, ep]))
        orders[ep] = rng.permutation(m)
    return orders


def _train_edge(train: Dataset, classes: np.ndarray, edge_id: int,
                config: TrainConfig, kernel) -> np.ndarray:
    positive = np.zeros(train.K, dtype=bool)
    positive[classes] = True
    y = np.where(positive[train.y], 1, -1).astype(np.int8)
    mean = np.zeros(train.d)
    var = np.ones(train.d)
    order = epoch_orders(train.m, config.epochs, config.seed, edge_id)
    kernel(train.indptr, train.indices, train.values, y, order, float(config.r), mean, var)
    return mean


def train_all(train: Dataset, graph: TrellisGraph, assignment: ClassAssignment,
              config: TrainConfig = TrainConfig(), kernel=None) -> MarginModel:
    """Train every edge learner independently.

    Learners share nothing mutable, so the result does not depend on
    ``config.threads``.
    """
    if train.K != graph.K:
        raise ValueError(f"dataset has K={train.K} classes but the graph has K={graph.K}")
    if assignment.K != graph.K:
        raise ValueError(f"assignment covers {assignment.K} classes, graph has {graph.K}")
    kernel = kernel or kernels.arow_train_edge
    table = edge_class_table(assignment, graph)
    weights = np.empty((graph.n_edges, train.d))

    def job(e):
        weights[e] = _train_edge(train, table[e], e, config, kernel)

    log.info("training %d AROW learners (d=%d, m=%d, epochs=%d, threads=%d, backend=%s)",
             graph.n_edges, train.d, train.m, config.epochs, config.threads, kernels.BACKEND)
    if config.threads == 1:
        for e in range(graph.n_edges):
            job(e)
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(job, range(graph.n_edges)))
    return MarginModel(weights)


def margins(model, x: SparseVector) -> np.ndarray:
    """``f_j(x)`` for every edge, touching only the nonzeros of ``x``."""
    W = model.weights
    if x.nnz == 0:
        return np.zeros(W.shape[0])
    keep = x.indices < W.shape[1]
    return W[:, x.indices[keep]].astype(np.float64) @ x.values[keep]


def margin_matrix(weights: np.ndarray, dataset: Dataset) -> np.ndarray:
    """Margins of every sample, shape (m, ell)."""
    X = dataset.to_csr(weights.shape[1])
    return np.asarray(X @ weights.T.astype(np.float64, copy=False))
