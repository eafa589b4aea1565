import threading
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidInputError


def inner_products(rows: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """
    Row-wise inner products. Every inner product in the package goes through here, so a value
    does not depend on how many other rows were computed alongside it.
    """
    return (rows * vector).sum(axis=1)


class PointSet:
    """
    n x m matrix of points (rows) with cached squared norms and a lazily filled Gram table.

    The Gram table is stored per row: row j holds v_j . v_k for the k filled so far, NaN otherwise.
    Rows are created on first use and never evicted, so a long run pays for each inner product once.
    """

    def __init__(self, points, cache: bool = True):
        matrix = np.array(points, dtype=float, copy=True)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise InvalidInputError(f"expected a non-empty n x m matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidInputError("point coordinates must be finite")

        matrix.setflags(write=False)
        self.points: np.ndarray = matrix
        self.squared_norms: np.ndarray = (matrix * matrix).sum(axis=1)
        self.squared_norms.setflags(write=False)

        self.cache_enabled = cache
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def _check_index(self, index: int) -> int:
        index = int(index)
        if index < 0 or index >= self.n:
            raise InvalidInputError(f"index {index} out of range for {self.n} points")
        return index

    def _row(self, j: int) -> np.ndarray:
        row = self._rows.get(j)
        if row is None:
            with self._lock:
                row = self._rows.get(j)
                if row is None:
                    row = np.full(self.n, np.nan)
                    row[j] = self.squared_norms[j]
                    self._rows[j] = row
        return row

    def gram(self, i: int, j: int) -> float:
        """Inner product v_i . v_j; fills the cache on first use."""
        i, j = self._check_index(i), self._check_index(j)
        if i == j:
            return float(self.squared_norms[i])
        if not self.cache_enabled:
            return float(inner_products(self.points[[i]], self.points[j])[0])

        for owner, other in ((i, j), (j, i)):
            row = self._rows.get(owner)
            if row is not None and not np.isnan(row[other]):
                return float(row[other])

        row = self._row(j)
        # concurrent fills write the same value
        row[i] = inner_products(self.points[[i]], self.points[j])[0]
        return float(row[i])

    def gram_row(self, j: int, indices: Optional[Iterable[int]] = None) -> np.ndarray:
        """
        Inner products of v_j with the points in ``indices`` (all points when omitted), filling missing entries.
        """
        j = self._check_index(j)
        if indices is None:
            idx = np.arange(self.n)
        else:
            idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=int)
            if idx.size and (idx.min() < 0 or idx.max() >= self.n):
                raise InvalidInputError(f"indices out of range for {self.n} points")

        if not self.cache_enabled:
            values = inner_products(self.points[idx], self.points[j])
            values[idx == j] = self.squared_norms[j]
            return values

        row = self._row(j)
        missing = idx[np.isnan(row[idx])]
        if missing.size:
            row[missing] = inner_products(self.points[missing], self.points[j])
        return row[idx].copy()

    def gram_filled(self) -> int:
        """Number of Gram entries currently stored (diagonal included)."""
        return int(sum(np.count_nonzero(~np.isnan(row)) for row in self._rows.values()))

    def subset(self, indices: Iterable[int]) -> "PointSet":
        return PointSet(self.points[list(indices)], cache=self.cache_enabled)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, index: int) -> np.ndarray:
        return self.points[index]

    def __iter__(self):
        return iter(self.points)

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, m={self.m}, cached_rows={len(self._rows)})"


__all__ = [
    "PointSet",
    "inner_products",
]
