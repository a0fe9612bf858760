"""Trellis graphs whose source-to-sink paths enumerate the classes.

Vertices are numbered source first (0), then the inner slices in order
(position-major within a slice), then the sink.  Edges are numbered
slice-major: the source edges, then for every inner slice its forward
edges ordered by (tail position, head position) followed by its sink
edges.  Numbering is therefore topological, which the Viterbi pass in
:mod:`wltls.decoder` relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _base_digits(K: int, b: int) -> list[int]:
    """Reverse base-``b`` digits of ``K`` (least significant first)."""
    digits = []
    while K:
        K, r = divmod(K, b)
        digits.append(r)
    return digits


def _exact_power(K: int, b: int) -> int | None:
    n, p = 0, 1
    while p < K:
        p *= b
        n += 1
    return n if p == K and n >= 1 else None


def floor_log(K: int, b: int) -> int:
    """``floor(log_b K)`` in exact integer arithmetic."""
    return len(_base_digits(K, b)) - 1


@dataclass(frozen=True, eq=False)
class TrellisGraph:
    K: int
    b: int
    literal: bool
    n_slices: int
    slice_sizes: tuple[int, ...]
    sink_counts: tuple[int, ...]
    vertex_slice: np.ndarray     # -1 for the source, n_slices for the sink
    vertex_position: np.ndarray
    tails: np.ndarray
    heads: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.tails)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_slice)

    source = 0

    @property
    def sink(self) -> int:
        return self.n_vertices - 1

    @cached_property
    def delta(self) -> np.ndarray:
        """Shortest edge-distance from the source, per vertex."""
        delta = np.full(self.n_vertices, np.iinfo(np.int64).max, dtype=np.int64)
        delta[self.source] = 0
        for t, h in zip(self.tails, self.heads):
            delta[h] = min(delta[h], delta[t] + 1)
        return delta

    @cached_property
    def tail_depth(self) -> np.ndarray:
        return self.delta[self.tails]

    @cached_property
    def is_sink_edge(self) -> np.ndarray:
        return self.heads == self.sink

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e, t in enumerate(self.tails.tolist()):
            out[t].append(e)
        return tuple(tuple(o) for o in out)

    @cached_property
    def paths_to_sink(self) -> np.ndarray:
        n = np.zeros(self.n_vertices, dtype=object)
        n[self.sink] = 1
        for e in range(self.n_edges - 1, -1, -1):
            n[self.tails[e]] += n[self.heads[e]]
        return n

    @cached_property
    def paths_from_source(self) -> np.ndarray:
        n = np.zeros(self.n_vertices, dtype=object)
        n[self.source] = 1
        for t, h in zip(self.tails, self.heads):
            n[h] += n[t]
        return n

    @cached_property
    def rank_offset(self) -> np.ndarray:
        """Per edge: paths through earlier-ordered siblings sharing its tail.

        A path's index is the sum of the offsets of its edges.
        """
        off = np.zeros(self.n_edges, dtype=np.int64)
        for edges in self.out_edges:
            acc = 0
            for e in edges:
                off[e] = acc
                acc += int(self.paths_to_sink[self.heads[e]])
        return off

    @cached_property
    def depth_count(self) -> int:
        return int(self.tail_depth.max()) + 1

    def __repr__(self):
        return f"TrellisGraph(K={self.K}, b={self.b}, edges={self.n_edges}, slices={self.n_slices})"


def build_graph(K: int, b: int, literal: bool = False) -> TrellisGraph:
    """Trellis graph with exactly ``K`` source-to-sink paths and slice width ``b``.

    Uses the base-``b`` digits of ``K``: inner slice ``i`` sends ``A[i]``
    of its vertices to the sink, and last-slice vertices that cannot reach
    the sink are dropped.  When ``K`` is an exact power ``b**n`` the default
    builds ``n`` full slices whose last one is wholly wired to the sink,
    instead of an extra one-vertex slice; ``literal=True`` keeps the
    extra slice.
    """
    if not isinstance(K, (int, np.integer)) or not isinstance(b, (int, np.integer)):
        raise TypeError("K and b must be integers")
    K, b = int(K), int(b)
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    if b < 2 or b > K:
        raise ValueError(f"slice width b must lie in [2, K={K}], got {b}")

    power = None if literal else _exact_power(K, b)
    if power is not None:
        sink_counts = [0] * (power - 1) + [b]
    else:
        sink_counts = _base_digits(K, b)
    n_slices = len(sink_counts)
    # Only the last slice loses vertices: the others always feed forward.
    sizes = [b] * (n_slices - 1) + [sink_counts[-1]]

    vertex_slice = [-1]
    vertex_position = [0]
    first = []
    for i, size in enumerate(sizes):
        first.append(len(vertex_slice))
        vertex_slice.extend([i] * size)
        vertex_position.extend(range(size))
    sink = len(vertex_slice)
    vertex_slice.append(n_slices)
    vertex_position.append(0)

    tails: list[int] = []
    heads: list[int] = []
    for p in range(sizes[0]):
        tails.append(0)
        heads.append(first[0] + p)
    for i in range(n_slices):
        if i + 1 < n_slices:
            for p in range(sizes[i]):
                for q in range(sizes[i + 1]):
                    tails.append(first[i] + p)
                    heads.append(first[i + 1] + q)
        for p in range(sink_counts[i]):
            tails.append(first[i] + p)
            heads.append(sink)

    return TrellisGraph(
        K=K, b=b, literal=literal, n_slices=n_slices,
        slice_sizes=tuple(sizes), sink_counts=tuple(sink_counts),
        vertex_slice=np.asarray(vertex_slice, dtype=np.int64),
        vertex_position=np.asarray(vertex_position, dtype=np.int64),
        tails=np.asarray(tails, dtype=np.int64),
        heads=np.asarray(heads, dtype=np.int64),
    )


def count_paths(graph: TrellisGraph) -> int:
    """Number of source-to-sink paths, by forward dynamic programming."""
    return int(graph.paths_from_source[graph.sink])


def s_set(graph: TrellisGraph, edge_id: int) -> set[int]:
    """Edges that can never share a path with ``edge_id`` (plus itself).

    Non-sink edges group with every edge whose tail has the same depth;
    sink edges additionally absorb every deeper edge.
    """
    if not 0 <= edge_id < graph.n_edges:
        raise IndexError(f"edge {edge_id} out of range")
    depth = graph.tail_depth
    s = depth[edge_id]
    if graph.is_sink_edge[edge_id]:
        mask = depth >= s
    else:
        mask = depth == s
    return set(np.flatnonzero(mask).tolist())


def index_to_path(graph: TrellisGraph, index: int) -> list[int]:
    if not 0 <= index < graph.K:
        raise IndexError(f"path index {index} outside [0, {graph.K})")
    path = []
    v = graph.source
    rest = int(index)
    while v != graph.sink:
        for e in graph.out_edges[v]:
            c = int(graph.paths_to_sink[graph.heads[e]])
            if rest < c:
                path.append(e)
                v = int(graph.heads[e])
                break
            rest -= c
    return path


def path_to_index(graph: TrellisGraph, path) -> int:
    path = [int(e) for e in path]
    v = graph.source
    for e in path:
        if not 0 <= e < graph.n_edges or graph.tails[e] != v:
            raise ValueError(f"{path} is not a source-to-sink path")
        v = int(graph.heads[e])
    if v != graph.sink:
        raise ValueError(f"{path} does not end at the sink")
    return int(graph.rank_offset[path].sum())


def codeword(graph: TrellisGraph, path_index: int) -> np.ndarray:
    """Edge-incidence vector of a path in {-1, +1}^ell."""
    bits = -np.ones(graph.n_edges, dtype=np.int8)
    bits[index_to_path(graph, path_index)] = 1
    return bits


def code_matrix(graph: TrellisGraph) -> np.ndarray:
    """All K codewords, row ``i`` for path index ``i``."""
    M = -np.ones((graph.K, graph.n_edges), dtype=np.int8)
    for i in range(graph.K):
        M[i, index_to_path(graph, i)] = 1
    return M


def min_hamming_distance(graph: TrellisGraph, limit: int = 4096) -> int | None:
    """Minimum pairwise codeword Hamming distance, or None when K > ``limit``."""
    if graph.K > limit:
        return None
    M = code_matrix(graph).astype(np.int32)
    agree = M @ M.T
    dist = (graph.n_edges - agree) // 2
    np.fill_diagonal(dist, np.iinfo(np.int32).max)
    return int(dist.min())


def edge_count_bound(K: int, b: int) -> int:
    return (b + 1) * (floor_log(K, b) + 1) * b + b
