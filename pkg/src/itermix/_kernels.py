"""Hot neighbor-scan kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version.  Both accumulate squared distances feature by feature in the same
order, so they return bit-identical distances and identical tie order
(ascending distance, then ascending point index).

The numba path is used when numba imports and ``ITERMIX_DISABLE_NUMBA`` is
unset (or ``0``/``false``).  The flag is read once at import time.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("ITERMIX_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED

# rows of the (queries x points) distance block per chunk in the numpy path
_CHUNK_CELLS = 4_000_000


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------


def sq_dists_numpy(points, query):
    n, d = points.shape
    out = np.zeros(n)
    for j in range(d):
        diff = points[:, j] - query[j]
        out += diff * diff
    return out


def k_nearest_numpy(points, query, k):
    dist = sq_dists_numpy(points, query)
    k = min(k, dist.shape[0])
    order = np.argsort(dist, kind="stable")[:k]
    return order.astype(np.int64), dist[order]


def nearest_label_numpy(points, labels, query, wanted):
    dist = sq_dists_numpy(points, query)
    cand = np.flatnonzero(labels == wanted)
    if cand.size == 0:
        return -1, np.inf
    # argmin returns the first minimum, i.e. the lowest index among ties
    j = cand[np.argmin(dist[cand])]
    return int(j), float(dist[j])


def _block_sq_dists(points, queries):
    m = queries.shape[0]
    n, d = points.shape
    out = np.zeros((m, n))
    for j in range(d):
        diff = queries[:, j][:, None] - points[:, j][None, :]
        # (q - p)^2 == (p - q)^2 bit for bit
        out += diff * diff
    return out


def knn_batch_numpy(points, queries, k):
    n = points.shape[0]
    m = queries.shape[0]
    k = min(k, n)
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k))
    step = max(1, _CHUNK_CELLS // max(n, 1))
    for lo in range(0, m, step):
        block = _block_sq_dists(points, queries[lo:lo + step])
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        idx[lo:lo + step] = order
        dist[lo:lo + step] = np.take_along_axis(block, order, axis=1)
    return idx, dist


def knn_positive_fraction_numpy(points, labels, queries, k):
    idx, _ = knn_batch_numpy(points, queries, k)
    return (labels[idx] == 1).sum(axis=1) / idx.shape[1]


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _njit = numba.njit(cache=True, nogil=True)

    @_njit
    def _sq_dists_nb(points, query):
        n, d = points.shape
        out = np.zeros(n)
        for j in range(d):
            qj = query[j]
            for i in range(n):
                diff = points[i, j] - qj
                out[i] += diff * diff
        return out

    @_njit
    def _insert_topk(best_i, best_d, count, k, i, di):
        # keeps (best_d, best_i) sorted; equal distances keep the earlier index first
        if count < k:
            pos = count
            count += 1
        elif di < best_d[k - 1]:
            pos = k - 1
        else:
            return count
        while pos > 0 and best_d[pos - 1] > di:
            best_d[pos] = best_d[pos - 1]
            best_i[pos] = best_i[pos - 1]
            pos -= 1
        best_d[pos] = di
        best_i[pos] = i
        return count

    @_njit
    def _k_nearest_nb(points, query, k):
        dist = _sq_dists_nb(points, query)
        n = dist.shape[0]
        if k > n:
            k = n
        best_i = np.empty(k, dtype=np.int64)
        best_d = np.empty(k)
        count = 0
        for i in range(n):
            count = _insert_topk(best_i, best_d, count, k, i, dist[i])
        return best_i, best_d

    @_njit
    def _nearest_label_nb(points, labels, query, wanted):
        dist = _sq_dists_nb(points, query)
        best = -1
        best_d = np.inf
        for i in range(dist.shape[0]):
            if labels[i] == wanted and (best < 0 or dist[i] < best_d):
                best = i
                best_d = dist[i]
        return best, best_d

    @_njit
    def _knn_batch_nb(points, queries, k):
        n, d = points.shape
        m = queries.shape[0]
        if k > n:
            k = n
        idx = np.empty((m, k), dtype=np.int64)
        dist = np.empty((m, k))
        row = np.empty(n)
        for q in range(m):
            row[:] = 0.0
            for j in range(d):
                qj = queries[q, j]
                for i in range(n):
                    diff = qj - points[i, j]
                    row[i] += diff * diff
            count = 0
            for i in range(n):
                count = _insert_topk(idx[q], dist[q], count, k, i, row[i])
        return idx, dist

    @_njit
    def _knn_positive_fraction_nb(points, labels, queries, k):
        idx, _ = _knn_batch_nb(points, queries, k)
        m, kk = idx.shape
        out = np.empty(m)
        for q in range(m):
            c = 0
            for t in range(kk):
                if labels[idx[q, t]] == 1:
                    c += 1
            out[q] = c / kk
        return out

    def sq_dists_numba(points, query):
        return _sq_dists_nb(points, query)

    def k_nearest_numba(points, query, k):
        return _k_nearest_nb(points, query, int(k))

    def nearest_label_numba(points, labels, query, wanted):
        i, d = _nearest_label_nb(points, labels, query, int(wanted))
        return int(i), float(d)

    def knn_batch_numba(points, queries, k):
        return _knn_batch_nb(points, queries, int(k))

    def knn_positive_fraction_numba(points, labels, queries, k):
        return _knn_positive_fraction_nb(points, labels, queries, int(k))


if USE_NUMBA:
    BACKEND = "numba"
    sq_dists = sq_dists_numba
    k_nearest = k_nearest_numba
    nearest_label = nearest_label_numba
    knn_batch = knn_batch_numba
    knn_positive_fraction = knn_positive_fraction_numba
else:
    BACKEND = "numpy"
    sq_dists = sq_dists_numpy
    k_nearest = k_nearest_numpy
    nearest_label = nearest_label_numpy
    knn_batch = knn_batch_numpy
    knn_positive_fraction = knn_positive_fraction_numpy
