"""
Dense rank-4 tensor helpers.

Tensors are plain numpy arrays in (n, c, h, w) row-major layout; this module
owns the precision modes and the shape checks every kernel relies on.
"""
from enum import Enum
from typing import Any, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from irrcnn.exceptions import ShapeError

Tensor = NDArray[np.floating]
Shape4 = Tuple[int, int, int, int]


class Precision(str, Enum):
    """Floating point width of a model, fixed when the model is built."""

    STANDARD = "standard"
    WIDE = "wide"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32) if self is Precision.STANDARD else np.dtype(np.float64)

    @classmethod
    def from_dtype(cls, dtype: np.dtype) -> "Precision":
        if np.dtype(dtype) == np.float32:
            return cls.STANDARD
        if np.dtype(dtype) == np.float64:
            return cls.WIDE
        raise ValueError(f"Unsupported dtype: {dtype}")


def tensor(data: Any, precision: Precision = Precision.STANDARD) -> Tensor:
    """
    Build a contiguous tensor in the requested precision.

    Args:
        data: Anything numpy can convert
        precision: Target precision

    Returns:
        C-contiguous numpy array
    """
    return np.ascontiguousarray(data, dtype=precision.dtype)


def check_rank4(x: np.ndarray, name: str = "x") -> Shape4:
    """Return the (n, c, h, w) shape or raise ``ShapeError``."""
    if x.ndim != 4:
        raise ShapeError(f"{name} must be rank-4 (n, c, h, w), got shape {x.shape}")
    n, c, h, w = x.shape
    return n, c, h, w


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "operands") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch between {what}: {a.shape} vs {b.shape}")


def pair(value: Any) -> Tuple[int, int]:
    """Normalize an int or 2-sequence into an (h, w) pair."""
    if isinstance(value, int):
        return value, value
    if isinstance(value, Sequence) and len(value) == 2:
        return int(value[0]), int(value[1])
    raise ValueError(f"Expected int or pair, got {value!r}")
