import numpy as np
import pytest

from itermix import _kernels
from itermix.errors import DimensionMismatch, EmptyIndex, NoSuchLabel
from itermix.neighbors import NeighborIndex, build


def oracle_sorted(points, query):
    """Exhaustive sort by (squared distance, index) using plain Python."""
    d = [(sum((p - q) ** 2 for p, q in zip(row, query)), i) for i, row in enumerate(points)]
    return sorted(d)


def random_instance(rng):
    n = int(rng.integers(1, 201))
    d = int(rng.integers(1, 9))
    # a coarse integer grid forces plenty of exact distance ties
    if rng.random() < 0.5:
        pts = rng.integers(-3, 4, size=(n, d)).astype(float)
        q = rng.integers(-3, 4, size=d).astype(float)
    else:
        pts = rng.normal(size=(n, d))
        q = rng.normal(size=d)
    labels = rng.integers(0, 2, size=n)
    return pts, labels, q


class TestBuild:
    def test_size_and_append(self):
        ix = build([[0, 0], [1, 0], [3, 0]])
        assert len(ix) == 3
        ix.append([5.0, 5.0], [1])
        assert len(ix) == 4
        np.testing.assert_array_equal(ix.points[:3], [[0, 0], [1, 0], [3, 0]])
        assert ix.labels[3] == 1

    def test_growth_keeps_indices(self):
        ix = build(np.zeros((2, 3)))
        for i in range(100):
            ix.append(np.full(3, float(i + 1)))
        assert len(ix) == 102
        assert ix.points[50, 0] == 49.0

    def test_mixed_dimensions(self):
        with pytest.raises(DimensionMismatch):
            build([[0.0, 0.0], [1.0]])

    def test_empty(self):
        with pytest.raises(EmptyIndex):
            build(np.empty((0, 2)))

    def test_append_wrong_dim(self):
        ix = build([[0.0, 0.0]])
        with pytest.raises(DimensionMismatch):
            ix.append([1.0, 2.0, 3.0])


class TestKNearest:
    def test_example(self):
        ix = build([[0, 0], [1, 0], [3, 0]])
        idx, dist = ix.k_nearest([0.9, 0.0], 2)
        assert idx.tolist() == [1, 0]
        np.testing.assert_allclose(dist, [0.01, 0.81])

    def test_clamp(self):
        ix = build([[0, 0], [1, 0], [3, 0]])
        idx, _ = ix.k_nearest([0.0, 0.0], 10)
        assert idx.tolist() == [0, 1, 2]

    def test_tie_lower_index_first(self):
        ix = build([[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0]])
        idx, dist = ix.k_nearest([0.0, 0.0], 3)
        assert idx.tolist() == [0, 1, 2]
        assert len(set(dist.tolist())) == 1

    def test_query_dimension(self):
        with pytest.raises(DimensionMismatch):
            build([[0.0, 0.0]]).k_nearest([1.0], 1)

    def test_matches_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            pts, labels, q = random_instance(rng)
            ix = NeighborIndex(pts, labels)
            k = int(rng.integers(1, len(pts) + 3))
            idx, dist = ix.k_nearest(q, k)
            ref = oracle_sorted(pts, q)[:k]
            assert idx.tolist() == [i for _, i in ref]
            np.testing.assert_allclose(dist, [d for d, _ in ref], rtol=1e-12, atol=1e-12)
            assert np.all(np.diff(dist) >= 0)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        pts = rng.integers(-2, 3, size=(60, 3)).astype(float)
        Q = rng.integers(-2, 3, size=(25, 3)).astype(float)
        ix = build(pts)
        bidx, bdist = ix.k_nearest_batch(Q, 7)
        for r in range(Q.shape[0]):
            idx, dist = ix.k_nearest(Q[r], 7)
            assert bidx[r].tolist() == idx.tolist()
            assert bdist[r].tobytes() == dist.tobytes()


class TestNearestWithLabel:
    def test_example(self):
        ix = build([[0, 0], [5, 0], [6, 0]], [0, 1, 1])
        i, d = ix.nearest_with_label([4.0, 0.0], 1)
        assert i == 1 and d == 1.0

    def test_absent(self):
        ix = build([[0, 0], [5, 0]], [0, 0])
        with pytest.raises(NoSuchLabel):
            ix.nearest_with_label([0.0, 0.0], 1)

    def test_zero_distance(self):
        ix = build([[0, 0], [1, 1]], [0, 1])
        assert ix.nearest_with_label([1.0, 1.0], 1) == (1, 0.0)

    def test_matches_filtered_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            pts, labels, q = random_instance(rng)
            ix = NeighborIndex(pts, labels)
            for wanted in (0, 1):
                ref = [(d, i) for d, i in oracle_sorted(pts, q) if labels[i] == wanted]
                if not ref:
                    with pytest.raises(NoSuchLabel):
                        ix.nearest_with_label(q, wanted)
                    continue
                i, d = ix.nearest_with_label(q, wanted)
                assert i == ref[0][1]


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
class TestBackendsAgree:
    """The numba and numpy kernels give bit-identical answers."""

    def test_all_kernels(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            pts, labels, q = random_instance(rng)
            Q = np.vstack([q, rng.normal(size=(5, pts.shape[1]))])
            k = int(rng.integers(1, 12))
            assert _kernels.sq_dists_numba(pts, q).tobytes() == _kernels.sq_dists_numpy(pts, q).tobytes()
            a, b = _kernels.k_nearest_numba(pts, q, k), _kernels.k_nearest_numpy(pts, q, k)
            assert a[0].tolist() == b[0].tolist() and a[1].tobytes() == b[1].tobytes()
            for wanted in (0, 1):
                assert _kernels.nearest_label_numba(pts, labels, q, wanted) == \
                    _kernels.nearest_label_numpy(pts, labels, q, wanted)
            a, b = _kernels.knn_batch_numba(pts, Q, k), _kernels.knn_batch_numpy(pts, Q, k)
            assert np.array_equal(a[0], b[0]) and a[1].tobytes() == b[1].tobytes()
            np.testing.assert_array_equal(
                _kernels.knn_positive_fraction_numba(pts, labels, Q, k),
                _kernels.knn_positive_fraction_numpy(pts, labels, Q, k))
