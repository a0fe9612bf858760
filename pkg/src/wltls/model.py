"""The full classifier: graph parameters, assignment, weights; pruning and I/O.

On-disk layout (little-endian)::

    b"WLTLS"  u16 version
    u32 K  u32 b  u32 d  u32 ell  u8 loss tag  i64 assignment seed (-1 if none)
    u32[K]  permutation (class id -> path index)
    K x (u16 length, utf-8 bytes)  original labels in class-id order
    ell x edge vector:
        u8 0, f32[d]                         dense
        u8 1, u32 nnz, nnz x (u32, f32)      sparse
    u32 crc32 of everything above

The trellis itself is never stored; it is rebuilt from (K, b).
"""
from __future__ import annotations

import logging
import os
import struct
import zlib
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .assignment import ClassAssignment, assign_random
from .data import Dataset
from .decoder import decode_batch
from .learner import margin_matrix
from .losses import LossKind
from .trellis import TrellisGraph, build_graph

log = logging.getLogger(__name__)

MAGIC = b"WLTLS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<IIIIBq")
_SPARSE_PAIR = np.dtype([("index", "<u4"), ("value", "<f4")])


class ModelFormatError(ValueError):
    pass


class ChecksumError(ModelFormatError):
    pass


class VersionError(ModelFormatError):
    pass


@dataclass(frozen=True, eq=False)
class WltlsModel:
    K: int
    b: int
    d: int
    loss: LossKind
    assignment: ClassAssignment
    labels: tuple[str, ...]
    weights: np.ndarray  # float32, (ell, d)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=np.float32))
        if self.weights.shape != (self.graph.n_edges, self.d):
            raise ValueError(f"weights have shape {self.weights.shape}, expected "
                             f"({self.graph.n_edges}, {self.d})")
        if self.assignment.K != self.K or len(self.labels) != self.K:
            raise ValueError("assignment/labels do not cover K classes")

    @cached_property
    def graph(self) -> TrellisGraph:
        return build_graph(self.K, self.b)

    @property
    def n_edges(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_margin_model(cls, margin_model, graph: TrellisGraph, assignment: ClassAssignment,
                          labels, loss=LossKind.EXPONENTIAL) -> "WltlsModel":
        return cls(graph.K, graph.b, margin_model.d, LossKind.parse(loss), assignment,
                   tuple(labels), margin_model.weights)

    def margin_matrix(self, dataset: Dataset) -> np.ndarray:
        return margin_matrix(self.weights, dataset)

    def predict(self, dataset: Dataset, loss=None, margins: np.ndarray | None = None,
                threads: int = 1):
        """Class ids and path totals for every sample."""
        F = self.margin_matrix(dataset) if margins is None else margins
        return decode_batch(self.graph, self.assignment, F, LossKind.parse(loss or self.loss),
                            chunk=1024 if threads > 1 else 4096, threads=threads)

    def accuracy(self, dataset: Dataset, loss=None) -> float:
        pred, _ = self.predict(dataset, loss)
        return float(np.mean(pred == dataset.y))

    def same_as(self, other: "WltlsModel") -> bool:
        return (self.K == other.K and self.b == other.b and self.d == other.d
                and self.loss is other.loss and self.labels == other.labels
                and self.assignment == other.assignment
                and self.weights.tobytes() == other.weights.tobytes())


def new_model(graph: TrellisGraph, d: int, labels, seed: int = 0,
              loss=LossKind.EXPONENTIAL) -> WltlsModel:
    """All-zero model with a random path assignment."""
    return WltlsModel(graph.K, graph.b, d, LossKind.parse(loss), assign_random(graph.K, seed),
                      tuple(labels), np.zeros((graph.n_edges, d), dtype=np.float32))


@dataclass(frozen=True)
class PruneReport:
    lam: float
    nnz_before: int
    nnz_after: int
    accuracy_before: float
    accuracy_after: float
    candidates: tuple = field(default=(), repr=False)  # (lam, accuracy, nnz) per grid point

    @property
    def degradation(self) -> float:
        return self.accuracy_before - self.accuracy_after

    @property
    def nnz_reduction(self) -> float:
        return 1.0 - self.nnz_after / self.nnz_before if self.nnz_before else 0.0

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "nnz_before": self.nnz_before,
            "nnz_after": self.nnz_after,
            "accuracy_before": self.accuracy_before,
            "accuracy_after": self.accuracy_after,
            "degradation": self.degradation,
        }


def prune(model: WltlsModel, lam: float) -> WltlsModel:
    """Zero every weight with magnitude at most ``lam``."""
    if not lam >= 0:
        raise ValueError(f"pruning threshold must be >= 0, got {lam}")
    W = model.weights.copy()
    W[np.abs(W) <= lam] = 0.0
    return replace(model, weights=W)


def lambda_grid(model: WltlsModel, start: float = 1e-4, ratio: float = 1.5) -> list[float]:
    top = float(np.abs(model.weights).max()) if model.weights.size else 0.0
    grid = [0.0]
    lam = start
    while lam < top:
        grid.append(lam)
        lam *= ratio
    if top > 0:
        grid.append(top)
    return grid


def tune_prune(model: WltlsModel, validation: Dataset, max_degradation: float = 0.01,
               loss=None, grid: list[float] | None = None):
    """Largest grid threshold whose validation accuracy drop stays within budget.

    ``max_degradation`` is in accuracy units (0.01 is one point).
    Returns ``(lam, pruned_model, report)``.
    """
    grid = lambda_grid(model) if grid is None else sorted(grid)
    X = validation.to_csr(model.d)
    W = model.weights

    def score(lam):
        Wp = np.where(np.abs(W) <= lam, np.float32(0), W)
        F = np.asarray(X @ Wp.T.astype(np.float64))
        pred, _ = model.predict(validation, loss, margins=F)
        return float(np.mean(pred == validation.y)), int(np.count_nonzero(Wp))

    base, nnz0 = score(0.0)
    best = (0.0, base, nnz0)
    seen = []
    for lam in grid:
        acc, nnz = score(lam)
        seen.append((lam, acc, nnz))
        if base - acc <= max_degradation + 1e-12 and lam >= best[0]:
            best = (lam, acc, nnz)
    lam, acc, nnz = best
    log.info("pruning at lambda=%.4g keeps %d/%d weights, validation %.4f -> %.4f",
             lam, nnz, nnz0, base, acc)
    report = PruneReport(lam, int(np.count_nonzero(W)), nnz, base, acc, tuple(seen))
    return lam, prune(model, lam), report


def _encode_vector(w: np.ndarray) -> bytes:
    # Select by bit pattern so that -0.0 survives the round trip.
    nz = np.flatnonzero(w.astype("<f4").view("<u4"))
    if 4 + 8 * len(nz) < 4 * len(w):
        pairs = np.empty(len(nz), dtype=_SPARSE_PAIR)
        pairs["index"] = nz
        pairs["value"] = w[nz]
        return b"\x01" + struct.pack("<I", len(nz)) + pairs.tobytes()
    return b"\x00" + w.astype("<f4").tobytes()


def dumps(model: WltlsModel) -> bytes:
    parts = [MAGIC, struct.pack("<H", model.version)]
    seed = -1 if model.assignment.seed is None else int(model.assignment.seed)
    parts.append(_HEADER.pack(model.K, model.b, model.d, model.n_edges, model.loss.tag, seed))
    parts.append(model.assignment.permutation.astype("<u4").tobytes())
    for label in model.labels:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
    for w in model.weights:
        parts.append(_encode_vector(w))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads(blob: bytes) -> WltlsModel:
    if len(blob) < len(MAGIC) + 2:
        raise ChecksumError("model file is truncated")
    if blob[:len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a W-LTLS model file (bad magic)")
    (version,) = struct.unpack_from("<H", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionError(f"model format version {version} is not supported "
                           f"(this build reads version {FORMAT_VERSION})")
    if len(blob) < len(MAGIC) + 2 + _HEADER.size + 4:
        raise ChecksumError("model file is truncated")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise ChecksumError("model file checksum mismatch (truncated or corrupted)")

    pos = len(MAGIC) + 2
    K, b, d, ell, tag, seed = _HEADER.unpack_from(body, pos)
    pos += _HEADER.size
    perm = np.frombuffer(body, dtype="<u4", count=K, offset=pos).astype(np.int64)
    pos += 4 * K
    labels = []
    for _ in range(K):
        (n,) = struct.unpack_from("<H", body, pos)
        labels.append(body[pos + 2:pos + 2 + n].decode("utf-8"))
        pos += 2 + n
    W = np.zeros((ell, d), dtype=np.float32)
    for j in range(ell):
        flag = body[pos]
        pos += 1
        if flag == 0:
            W[j] = np.frombuffer(body, dtype="<f4", count=d, offset=pos)
            pos += 4 * d
        elif flag == 1:
            (nnz,) = struct.unpack_from("<I", body, pos)
            pairs = np.frombuffer(body, dtype=_SPARSE_PAIR, count=nnz, offset=pos + 4)
            W[j, pairs["index"]] = pairs["value"]
            pos += 4 + 8 * nnz
        else:
            raise ModelFormatError(f"bad vector flag {flag} for edge {j}")
    if pos != len(body):
        raise ModelFormatError("trailing bytes after the weight payload")
    assignment = ClassAssignment(perm, None if seed < 0 else seed)
    return WltlsModel(K, b, d, LossKind.from_tag(tag), assignment, tuple(labels), W, version)


def save(model: WltlsModel, path: str | os.PathLike) -> int:
    blob = dumps(model)
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def load(path: str | os.PathLike) -> WltlsModel:
    with open(path, "rb") as fh:
        return loads(fh.read())


def model_stats(model: WltlsModel, d_e: float | None = None) -> dict:
    """Weight counts and size accounting.

    ``bytes_dense`` counts 4 bytes per weight; ``bytes_sparse`` counts 8
    bytes per stored nonzero plus a 5-byte header per edge vector.
    ``decode_ops`` estimates per-query work for inputs with ``d_e`` nonzeros.
    """
    nnz_per_edge = np.count_nonzero(model.weights, axis=1)
    ell, d = model.weights.shape
    g = model.graph
    d_e = d if d_e is None else d_e
    return {
        "K": model.K,
        "b": model.b,
        "d": d,
        "ell": ell,
        "nnz": int(nnz_per_edge.sum()),
        "nnz_fraction": float(nnz_per_edge.sum()) / (ell * d) if ell * d else 0.0,
        "bytes_dense": 4 * ell * d,
        "bytes_sparse": int(5 * ell + 8 * nnz_per_edge.sum()),
        "bytes_file": len(dumps(model)),
        "decode_ops": float(d_e * ell + 3 * ell + g.n_vertices),
    }
