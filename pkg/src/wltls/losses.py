"""Margin losses used for loss-based decoding and training diagnostics."""
from __future__ import annotations

import enum
import math

import numpy as np

# Exponential loss overflows float64 for margins below about -709.78.
LOSS_CLAMP = 1e300


class LossKind(enum.Enum):
    EXPONENTIAL = "exp"
    SQUARED = "squared"
    LOG = "log"
    HINGE = "hinge"
    SQUARED_HINGE = "squaredhinge"
    HAMMING = "hamming"

    @classmethod
    def parse(cls, name: "str | LossKind") -> "LossKind":
        if isinstance(name, LossKind):
            return name
        key = name.strip().lower().replace("_", "").replace("-", "")
        aliases = {"exponential": "exp", "hammingstep": "hamming", "sqhinge": "squaredhinge"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        choices = "|".join(k.value for k in cls)
        raise ValueError(f"unknown loss {name!r}; expected one of {choices}")

    @property
    def tag(self) -> int:
        return _TAGS[self]

    @classmethod
    def from_tag(cls, tag: int) -> "LossKind":
        for kind, t in _TAGS.items():
            if t == tag:
                return kind
        raise ValueError(f"unknown loss tag {tag}")


_TAGS = {
    LossKind.EXPONENTIAL: 0,
    LossKind.SQUARED: 1,
    LossKind.LOG: 2,
    LossKind.HINGE: 3,
    LossKind.SQUARED_HINGE: 4,
    LossKind.HAMMING: 5,
}


def loss_values(kind: LossKind | str, z) -> np.ndarray:
    """Vectorised margin loss ``L(z)``.

    Exponential values are clamped at ``LOSS_CLAMP`` so sums stay finite.
    """
    kind = LossKind.parse(kind)
    z = np.asarray(z, dtype=np.float64)
    if kind is LossKind.EXPONENTIAL:
        with np.errstate(over="ignore"):
            return np.minimum(np.exp(-z), LOSS_CLAMP)
    if kind is LossKind.SQUARED:
        return (1.0 - z) ** 2
    if kind is LossKind.LOG:
        return np.logaddexp(0.0, -z)
    if kind is LossKind.HINGE:
        return np.maximum(0.0, 1.0 - z)
    if kind is LossKind.SQUARED_HINGE:
        return np.maximum(0.0, 1.0 - z) ** 2
    return np.where(z > 0, 0.0, np.where(z < 0, 1.0, 0.5))


def loss(kind: LossKind | str, z: float) -> float:
    if not math.isfinite(z):
        raise ValueError(f"loss is undefined for non-finite margin {z!r}")
    return float(loss_values(kind, z))


def loss_at_zero(kind: LossKind | str) -> float:
    kind = LossKind.parse(kind)
    if kind is LossKind.LOG:
        return math.log(2.0)
    if kind is LossKind.HAMMING:
        return 0.5
    return 1.0
