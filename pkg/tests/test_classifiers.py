import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from itermix.classifiers import ClassifierSpec, KNNClassifier, MLPClassifier, fit, restore
from itermix.data import Dataset, LabeledSample
from itermix.errors import DimensionMismatch, InvalidConfig, SingleClassData


def separable(n=40, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 2))
    X[:, 0] += np.where(np.arange(n) < n // 2, -1.5, 1.5)
    y = (np.arange(n) >= n // 2).astype(int)
    return Dataset(X, y)


def central_fd(f, params, h=1e-5):
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = p[i]
            p[i] = old + h
            up = f()
            p[i] = old - h
            down = f()
            p[i] = old
            g[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b)))


class TestKNN:
    def test_fit_pool_size(self, blobs):
        clf = fit(ClassifierSpec("knn"), blobs)
        assert isinstance(clf, KNNClassifier)
        assert clf.pool_size == len(blobs)

    def test_vote_fraction_brute_force(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(20, 2))
        y = np.zeros(20, int)
        q = np.array([0.1, -0.2])
        order = np.argsort(((X - q) ** 2).sum(1), kind="stable")
        y[order[:3]] = 1
        y[order[15:]] = 1
        clf = fit(ClassifierSpec("knn", knn_k=10), Dataset(X, y))
        assert clf.predict_proba(q) == pytest.approx(0.3, abs=1e-15)

    def test_all_neighbors_minority(self):
        X = np.r_[np.zeros((10, 2)), np.full((10, 2), 9.0)]
        y = np.r_[np.ones(10, int), np.zeros(10, int)]
        clf = fit(ClassifierSpec("knn", knn_k=10), Dataset(X, y))
        assert clf.predict_proba([0.0, 0.0]) == 1.0

    def test_update_grows_pool(self, blobs):
        clf = fit(ClassifierSpec("knn"), blobs)
        clf.update([LabeledSample([0.0, 0.0], 1)] * 3)
        assert clf.pool_size == len(blobs) + 3

    def test_duplicates_dominate(self, blobs):
        clf = fit(ClassifierSpec("knn", knn_k=10), blobs)
        x = np.array([0.05, -0.02])
        clf.update([LabeledSample(x, 1)] * 10)
        assert clf.predict_proba(x) == 1.0

    def test_single_class(self):
        with pytest.raises(SingleClassData):
            fit(ClassifierSpec("knn"), Dataset(np.zeros((5, 2)), np.zeros(5, int)))

    def test_dimension_check(self, blobs):
        clf = fit(ClassifierSpec("knn"), blobs)
        with pytest.raises(DimensionMismatch):
            clf.predict_proba([1.0, 2.0, 3.0])
        with pytest.raises(DimensionMismatch):
            clf.update([LabeledSample([1.0], 0)])


class TestMLP:
    def spec(self, **kw):
        base = dict(kind="mlp", mlp_layers=(16, 8), mlp_epochs_initial=30, seed=3)
        base.update(kw)
        return ClassifierSpec(**base)

    def test_loss_decreases(self):
        ds = separable()
        init = MLPClassifier(self.spec(), ds).loss()
        trained = fit(self.spec(), ds).loss()
        assert trained < init

    def test_capacity(self):
        ds = separable()
        clf = fit(self.spec(mlp_epochs_initial=500, mlp_learning_rate=1e-2), ds)
        assert np.array_equal(clf.predict(ds.X), ds.y)

    def test_zero_weights_half(self):
        clf = MLPClassifier(self.spec(), separable())
        clf.net.zero_()
        np.testing.assert_array_equal(clf.predict_proba(np.random.default_rng(0).normal(size=(7, 2))), 0.5)

    def test_bit_identical_fit(self):
        a = fit(self.spec(), separable())
        b = fit(self.spec(), separable())
        for p, q in zip(a.net.params, b.net.params):
            assert p.tobytes() == q.tobytes()

    def test_update_reduces_pool_loss(self):
        # frozen regression scenario: seed 3, 30 warm-up epochs, 20 update steps
        ds = separable()
        clf = fit(self.spec(), ds)
        new = [LabeledSample([1.4, 0.2], 1), LabeledSample([-1.6, 0.1], 0)]
        before = clf.loss(np.r_[ds.X, [s.features for s in new]], np.r_[ds.y, [1, 0]])
        clf.update(new)
        assert clf.pool_size == len(ds) + 2
        assert clf.loss() <= before

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(1, 6))
            widths = tuple(int(w) for w in rng.integers(1, 9, size=int(rng.integers(1, 3))))
            n = int(rng.integers(3, 9))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n)
            y[0], y[1] = 0, 1
            clf = MLPClassifier(ClassifierSpec("mlp", mlp_layers=widths, seed=int(rng.integers(1e6))),
                                Dataset(X, y))
            analytic = clf.gradients(X, y)
            numeric = central_fd(lambda: clf.loss(X, y), clf.net.params)
            for a, b in zip(analytic, numeric):
                worst = max(worst, rel_err(a, b))
        assert worst <= 1e-4


class TestSnapshot:
    @pytest.mark.parametrize("kind", ["knn", "mlp"])
    def test_restore_undoes_update(self, blobs, kind):
        clf = fit(ClassifierSpec(kind, mlp_layers=(8,), mlp_epochs_initial=5), blobs)
        probes = np.random.default_rng(1).normal(size=(100, 2)) * 2
        before = clf.predict_proba(probes)
        snap = clf.snapshot()
        clf.update([LabeledSample([0.0, 0.0], 1)] * 5)
        assert not np.array_equal(clf.predict_proba(probes), before) or kind == "knn"
        back = restore(snap)
        assert back.predict_proba(probes).tobytes() == before.tobytes()
        assert back.pool_size == len(blobs)
        assert snap.snapshot().predict_proba(probes).tobytes() == before.tobytes()


class TestSpec:
    def test_invalid(self):
        with pytest.raises(InvalidConfig):
            ClassifierSpec("svm")
        with pytest.raises(InvalidConfig):
            ClassifierSpec("knn", knn_k=0)
        with pytest.raises(InvalidConfig):
            ClassifierSpec("mlp", mlp_layers=(4, 0))


@settings(max_examples=60, deadline=None)
@given(X=arrays(np.float64, (5, 2), elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_proba_in_unit_interval(X):
    ds = separable()
    for clf in (fit(ClassifierSpec("knn", knn_k=3), ds),
                MLPClassifier(ClassifierSpec("mlp", mlp_layers=(4,), seed=1), ds)):
        p = clf.predict_proba(X)
        assert np.all((p >= 0.0) & (p <= 1.0))
