"""Structured parameter containers and their elementwise algebra.

A parameter vector is an ordered tuple of dense float64 blocks, each a 1-d
vector or 2-d matrix.  Gradients, momentum estimates, and update directions
all live in the same container.  Values are immutable once constructed and
every operation that could produce NaN/Inf checks its result; a non-finite
value is a hard error rather than something that silently poisons later
clipping thresholds.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalError, StructuralError

__all__ = [
    "ParamVector",
    "axpy",
    "inner",
    "euclidean_norm",
    "scale",
    "zeros_like",
    "max_abs_diff",
    "to_flat",
    "from_flat",
]


def _as_block(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise StructuralError(f"blocks must be vectors or matrices, got ndim={arr.ndim}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class ParamVector:
    """Ordered list of dense blocks (vectors and matrices), immutable after construction."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable):
        blocks = tuple(_as_block(b) for b in blocks)
        if len(blocks) == 0:
            raise StructuralError("a parameter vector needs at least one block")
        for b in blocks:
            if not np.all(np.isfinite(b)):
                raise NumericalError("non-finite entry in parameter block")
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("ParamVector is immutable")

    @property
    def shapes(self) -> tuple:
        return tuple(b.shape for b in self.blocks)

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i) -> np.ndarray:
        return self.blocks[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamVector):
            return NotImplemented
        return self.shapes == other.shapes and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    def __hash__(self):
        return hash(self.shapes)

    def __repr__(self) -> str:
        return f"ParamVector(shapes={self.shapes})"


def _check_compatible(x: ParamVector, y: ParamVector) -> None:
    if x.shapes != y.shapes:
        raise StructuralError(f"shape mismatch: {x.shapes} vs {y.shapes}")


def _wrap(blocks: Sequence[np.ndarray]) -> ParamVector:
    for b in blocks:
        if not np.all(np.isfinite(b)):
            raise NumericalError("operation produced a non-finite value")
    return ParamVector(blocks)


def axpy(a: float, x: ParamVector, y: ParamVector) -> ParamVector:
    """Return a*x + y blockwise."""
    _check_compatible(x, y)
    a = float(a)
    return _wrap([a * bx + by for bx, by in zip(x.blocks, y.blocks)])


def inner(x: ParamVector, y: ParamVector) -> float:
    """Sum over blocks of the Frobenius/Euclidean inner product."""
    _check_compatible(x, y)
    total = 0.0
    for bx, by in zip(x.blocks, y.blocks):
        total += float(np.vdot(bx, by))
    if not np.isfinite(total):
        raise NumericalError("inner product overflowed")
    return total


def euclidean_norm(x: ParamVector) -> float:
    """sqrt(inner(x, x)), the flat l2 norm over all blocks."""
    return float(np.sqrt(inner(x, x)))


def scale(a: float, x: ParamVector) -> ParamVector:
    """Return a*x."""
    a = float(a)
    return _wrap([a * b for b in x.blocks])


def zeros_like(x: ParamVector) -> ParamVector:
    return ParamVector([np.zeros(b.shape) for b in x.blocks])


def max_abs_diff(x: ParamVector, y: ParamVector) -> float:
    """Largest per-coordinate absolute deviation between two vectors."""
    _check_compatible(x, y)
    return max(float(np.max(np.abs(bx - by))) if bx.size else 0.0 for bx, by in zip(x.blocks, y.blocks))


def to_flat(x: ParamVector) -> np.ndarray:
    """Concatenate all blocks into one flat array (copy)."""
    return np.concatenate([b.reshape(-1) for b in x.blocks])


def from_flat(flat: np.ndarray, like: ParamVector) -> ParamVector:
    """Reshape a flat array into the block structure of `like`."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.size != like.size:
        raise StructuralError(f"flat size {flat.size} != parameter size {like.size}")
    out, start = [], 0
    for b in like.blocks:
        out.append(flat[start : start + b.size].reshape(b.shape))
        start += b.size
    return ParamVector(out)
