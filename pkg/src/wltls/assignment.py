"""Seeded bijection between class ids and trellis path indices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trellis import TrellisGraph, index_to_path


@dataclass(frozen=True, eq=False)
class ClassAssignment:
    permutation: np.ndarray  # class id -> path index
    seed: int | None = None
    _inverse: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(len(perm))):
            raise ValueError("assignment is not a permutation of [0, K)")
        object.__setattr__(self, "permutation", perm)

    @property
    def K(self) -> int:
        return len(self.permutation)

    @property
    def inverse(self) -> np.ndarray:
        """Path index -> class id."""
        if not self._inverse:
            inv = np.empty_like(self.permutation)
            inv[self.permutation] = np.arange(self.K)
            self._inverse.append(inv)
        return self._inverse[0]

    def path_of(self, class_id: int) -> int:
        return int(self.permutation[class_id])

    def class_of(self, path_index: int) -> int:
        return int(self.inverse[path_index])

    def class_paths(self, graph: TrellisGraph) -> list[list[int]]:
        """Edge list of every class's path, indexed by class id."""
        return [index_to_path(graph, int(p)) for p in self.permutation]

    def __eq__(self, other):
        if not isinstance(other, ClassAssignment):
            return NotImplemented
        return np.array_equal(self.permutation, other.permutation)

    __hash__ = None


def assign_random(K: int, seed: int = 0) -> ClassAssignment:
    if K < 2:
        raise ValueError("K must be >= 2")
    perm = np.random.default_rng(seed).permutation(K)
    return ClassAssignment(perm, seed)
