"""svmlight/libsvm multiclass datasets held in CSR form."""
from __future__ import annotations

import bz2
import gzip
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np
import scipy.sparse as sp


class ParseError(ValueError):
    """Malformed libsvm input; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        if len(self.indices) > 1 and np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly increasing")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        pairs = sorted((int(i), float(v)) for i, v in pairs if v != 0.0)
        idx = np.array([p[0] for p in pairs], dtype=np.int64)
        val = np.array([p[1] for p in pairs], dtype=np.float64)
        return cls(idx, val)

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def dot(self, dense: np.ndarray) -> float:
        if self.nnz == 0:
            return 0.0
        return float(np.dot(dense[self.indices], self.values))

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable multiclass dataset.

    Samples are stored as CSR arrays (``indptr``, ``indices``, ``values``)
    with one contiguous class id per row. ``labels`` maps class id to the
    original label string.
    """

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    y: np.ndarray
    d: int
    labels: tuple[str, ...]
    _csr: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if len(self.y) == 0:
            raise ValueError("dataset is empty")
        if len(self.indptr) != len(self.y) + 1:
            raise ValueError("indptr does not match the number of samples")
        if self.y.min() < 0 or self.y.max() >= len(self.labels):
            raise ValueError("class id outside [0, K)")
        if len(self.indices) and self.indices.max() >= self.d:
            raise ValueError("feature index >= d")

    @property
    def m(self) -> int:
        return len(self.y)

    @property
    def K(self) -> int:
        return len(self.labels)

    @property
    def label_map(self) -> dict[str, int]:
        return {lab: k for k, lab in enumerate(self.labels)}

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> tuple[SparseVector, int]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.indices[lo:hi], self.values[lo:hi]), int(self.y[i])

    def __iter__(self) -> Iterator[tuple[SparseVector, int]]:
        for i in range(self.m):
            yield self[i]

    def to_csr(self, d: int | None = None) -> sp.csr_matrix:
        """Feature matrix, optionally restricted or padded to ``d`` columns."""
        if d is None or d == self.d:
            if not self._csr:
                self._csr.append(sp.csr_matrix((self.values, self.indices, self.indptr),
                                               shape=(self.m, self.d)))
            return self._csr[0]
        full = sp.csr_matrix((self.values, self.indices, self.indptr),
                             shape=(self.m, max(d, self.d)))
        return full[:, :d].tocsr()

    def take(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        starts, stops = self.indptr[rows], self.indptr[rows + 1]
        lengths = stops - starts
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        gather = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)]) \
            if len(rows) else np.zeros(0, dtype=np.int64)
        gather = gather.astype(np.int64)
        return Dataset(indptr, self.indices[gather], self.values[gather], self.y[rows],
                       self.d, self.labels)

    def stats(self) -> dict:
        return {
            "m": self.m,
            "K": self.K,
            "d": self.d,
            "mean_nnz": float(len(self.indices)) / self.m,
        }


def _open_text(path: str | os.PathLike) -> TextIO:
    path = os.fspath(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    if path.endswith(".bz2"):
        return io.TextIOWrapper(bz2.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def parse_libsvm(stream: TextIO | Iterable[str], index_base: int = 1,
                 labels: Iterable[str] | None = None,
                 n_features: int | None = None) -> Dataset:
    """Parse ``<label> <idx>:<val> ...`` lines into a :class:`Dataset`.

    With ``labels`` given, the class-id mapping is fixed (as when scoring
    a test file against a trained model) and unseen labels are an error.
    ``n_features`` sets a minimum for ``d``.
    """
    if index_base not in (0, 1):
        raise ValueError("index_base must be 0 or 1")
    fixed = labels is not None
    label_ids: dict[str, int] = {lab: k for k, lab in enumerate(labels)} if fixed else {}
    indptr = [0]
    all_idx: list[int] = []
    all_val: list[float] = []
    ys: list[int] = []
    max_index = -1

    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label = tokens[0]
        if "," in label:
            raise ParseError(f"multilabel sample {label!r} is not supported", lineno)
        if ":" in label:
            raise ParseError(f"missing label before {label!r}", lineno)
        if label not in label_ids:
            if fixed:
                raise ParseError(f"label {label!r} not known to the model", lineno)
            label_ids[label] = len(label_ids)
        row: list[tuple[int, float]] = []
        for tok in tokens[1:]:
            key, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"malformed token {tok!r}", lineno)
            try:
                idx = int(key) - index_base
                value = float(val)
            except ValueError:
                raise ParseError(f"malformed token {tok!r}", lineno) from None
            if idx < 0:
                raise ParseError(f"feature index {key} below base {index_base}", lineno)
            if not math.isfinite(value):
                raise ParseError(f"non-finite value in {tok!r}", lineno)
            row.append((idx, value))
        if any(row[i][0] >= row[i + 1][0] for i in range(len(row) - 1)):
            row.sort(key=lambda p: p[0])
            for a, b in zip(row, row[1:]):
                if a[0] == b[0]:
                    raise ParseError(f"duplicate feature index {a[0] + index_base}", lineno)
        for idx, value in row:
            if value != 0.0:
                all_idx.append(idx)
                all_val.append(value)
        if row:
            max_index = max(max_index, row[-1][0])
        indptr.append(len(all_idx))
        ys.append(label_ids[label])

    if not ys:
        raise ParseError("no samples in input")
    d = max_index + 1
    if n_features is not None:
        d = max(d, n_features)
    names = tuple(sorted(label_ids, key=label_ids.get))
    return Dataset(np.asarray(indptr, dtype=np.int64),
                   np.asarray(all_idx, dtype=np.int64),
                   np.asarray(all_val, dtype=np.float64),
                   np.asarray(ys, dtype=np.int64), max(d, 1), names)


def load_libsvm(path: str | os.PathLike, index_base: int = 1, **kwargs) -> Dataset:
    """Read a libsvm file; ``.gz`` and ``.bz2`` paths are decompressed on the fly."""
    with _open_text(path) as fh:
        return parse_libsvm(fh, index_base=index_base, **kwargs)


def format_libsvm(dataset: Dataset, index_base: int = 1) -> str:
    out = []
    for i in range(dataset.m):
        lo, hi = dataset.indptr[i], dataset.indptr[i + 1]
        feats = " ".join(f"{j + index_base}:{v!r}" for j, v in
                         zip(dataset.indices[lo:hi].tolist(), dataset.values[lo:hi].tolist()))
        label = dataset.labels[dataset.y[i]]
        out.append(f"{label} {feats}".rstrip())
    return "\n".join(out) + "\n"


def write_libsvm(dataset: Dataset, path: str | os.PathLike, index_base: int = 1) -> None:
    path = os.fspath(path)
    text = format_libsvm(dataset, index_base)
    if path.endswith(".gz"):
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def shuffle(dataset: Dataset, seed: int) -> Dataset:
    perm = np.random.default_rng(seed).permutation(dataset.m)
    return dataset.take(perm)


def split(dataset: Dataset, validation_fraction: float = 0.1,
          seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded train/validation split.

    The validation part gets ``round(m * fraction)`` samples (halves round up).
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must lie in (0, 1)")
    n_val = int(math.floor(dataset.m * validation_fraction + 0.5))
    if n_val == 0 or n_val == dataset.m:
        raise ValueError(
            f"fraction {validation_fraction} of {dataset.m} samples leaves an empty part")
    perm = np.random.default_rng(seed).permutation(dataset.m)
    val_rows = np.sort(perm[:n_val])
    train_rows = np.sort(perm[n_val:])
    return dataset.take(train_rows), dataset.take(val_rows)
