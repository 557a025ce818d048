"""Exact brute-force nearest-neighbor index.

Distances are *squared* Euclidean.  Results are ordered by ascending
distance, ties broken by ascending point index, so every consumer sees the
same neighbor order on every run and on both kernel backends.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, EmptyIndex, NoSuchLabel

__all__ = ["NeighborIndex", "build"]


class NeighborIndex:
    """Growable point set with labels, answering exact k-NN queries.

    Appending never changes the index of an existing point.
    """

    def __init__(self, points, labels=None):
        try:
            pts = np.array(points, dtype=np.float64)
        except ValueError:
            raise DimensionMismatch("points have inconsistent dimensions") from None
        if pts.ndim != 2:
            raise DimensionMismatch("points must form an (n, d) array")
        n, d = pts.shape
        if n == 0:
            raise EmptyIndex("cannot build an index over zero points")
        lab = np.zeros(n, np.int64) if labels is None else np.array(labels, dtype=np.int64).reshape(-1)
        if lab.shape[0] != n:
            raise DimensionMismatch(f"{n} points but {lab.shape[0]} labels")
        cap = max(16, n)
        self._pts = np.empty((cap, d))
        self._lab = np.empty(cap, np.int64)
        self._pts[:n] = pts
        self._lab[:n] = lab
        self._n = n
        self.dim = d

    def __len__(self) -> int:
        return self._n

    @property
    def points(self) -> np.ndarray:
        v = self._pts[: self._n]
        v.flags.writeable = False
        return v

    @property
    def labels(self) -> np.ndarray:
        v = self._lab[: self._n]
        v.flags.writeable = False
        return v

    def copy(self) -> "NeighborIndex":
        return NeighborIndex(self._pts[: self._n].copy(), self._lab[: self._n].copy())

    def append(self, points, labels=None) -> None:
        pts = np.array(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DimensionMismatch(f"expected points of dimension {self.dim}")
        m = pts.shape[0]
        lab = np.zeros(m, np.int64) if labels is None else np.array(labels, dtype=np.int64).reshape(-1)
        if lab.shape[0] != m:
            raise DimensionMismatch(f"{m} points but {lab.shape[0]} labels")
        need = self._n + m
        if need > self._pts.shape[0]:
            cap = max(need, 2 * self._pts.shape[0])
            pts_new = np.empty((cap, self.dim))
            lab_new = np.empty(cap, np.int64)
            pts_new[: self._n] = self._pts[: self._n]
            lab_new[: self._n] = self._lab[: self._n]
            self._pts, self._lab = pts_new, lab_new
        self._pts[self._n:need] = pts
        self._lab[self._n:need] = lab
        self._n = need

    def _query_vec(self, query) -> np.ndarray:
        q = np.asarray(query, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.dim:
            raise DimensionMismatch(f"query has dimension {q.shape[0]}, index has {self.dim}")
        return q

    def k_nearest(self, query, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and squared distances of the ``k`` nearest points.

        ``k`` larger than the index returns every point.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if self._n == 0:
            raise EmptyIndex("index is empty")
        return _kernels.k_nearest(self._pts[: self._n], self._query_vec(query), int(k))

    def k_nearest_batch(self, queries, k: int) -> tuple[np.ndarray, np.ndarray]:
        Q = np.asarray(queries, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[1] != self.dim:
            raise DimensionMismatch(f"queries must have shape (m, {self.dim})")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return _kernels.knn_batch(self._pts[: self._n], np.ascontiguousarray(Q), int(k))

    def positive_fraction(self, queries, k: int) -> np.ndarray:
        """Fraction of label-1 points among the ``k`` nearest of each query row."""
        Q = np.asarray(queries, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q[None, :]
        if Q.shape[1] != self.dim:
            raise DimensionMismatch(f"queries must have dimension {self.dim}")
        return _kernels.knn_positive_fraction(
            self._pts[: self._n], self._lab[: self._n], np.ascontiguousarray(Q), int(k))

    def nearest_with_label(self, query, wanted_label: int) -> tuple[int, float]:
        i, d = _kernels.nearest_label(self._pts[: self._n], self._lab[: self._n],
                                      self._query_vec(query), int(wanted_label))
        if i < 0:
            raise NoSuchLabel(f"index holds no point labeled {wanted_label}")
        return i, d


def build(points, labels=None) -> NeighborIndex:
    return NeighborIndex(points, labels)
