"""Dense category-by-category weight matrix and its binary file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import GraphFormatError

MATRIX_MAGIC = b"CLWM"
MATRIX_VERSION = 1
_HEADER = struct.Struct("<4sIQI")
_DTYPES = {4: "<f4", 8: "<f8"}


@dataclass(eq=False)
class CategoryMatrix:
    """Square ``dim x dim`` weight matrix; ``weights[c, c2]`` is the weight of c -> c2."""

    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if not w.flags.c_contiguous:
            self.weights = np.ascontiguousarray(w)

    @classmethod
    def zeros(cls, dim: int, dtype=np.float64) -> "CategoryMatrix":
        return cls(np.zeros((dim, dim), dtype=dtype))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.weights).all())

    def copy(self) -> "CategoryMatrix":
        return CategoryMatrix(self.weights.copy())

    def __eq__(self, other):
        if not isinstance(other, CategoryMatrix):
            return NotImplemented
        return self.weights.dtype == other.weights.dtype and np.array_equal(self.weights, other.weights)


def save_matrix(w: CategoryMatrix, path, width: int | None = None):
    """Write ``w``; ``width`` (4 or 8 bytes) defaults to the in-memory dtype."""
    width = width or w.weights.dtype.itemsize
    if width not in _DTYPES:
        raise ValueError(f"element width must be 4 or 8 bytes, got {width}")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MATRIX_MAGIC, MATRIX_VERSION, w.dim, width))
        f.write(w.weights.astype(_DTYPES[width], copy=False).tobytes(order="C"))


def load_matrix(path) -> CategoryMatrix:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise GraphFormatError("truncated matrix header", path=str(path))
    magic, version, dim, width = _HEADER.unpack_from(data)
    if magic != MATRIX_MAGIC:
        raise GraphFormatError("bad magic, not a matrix file", path=str(path))
    if version != MATRIX_VERSION or width not in _DTYPES:
        raise GraphFormatError(f"unsupported matrix version {version} / width {width}", path=str(path))
    expected = _HEADER.size + dim * dim * width
    if len(data) != expected:
        raise GraphFormatError(f"payload size {len(data)} != {expected}", path=str(path))
    arr = np.frombuffer(data, dtype=_DTYPES[width], offset=_HEADER.size).reshape(dim, dim)
    return CategoryMatrix(arr.astype(arr.dtype.newbyteorder("="), copy=True))
