"""Probabilistic binary classifiers that can absorb synthetic samples.

Two kinds are provided, both exposing ``predict_proba``, ``update`` and
``snapshot``:

* :class:`KNNClassifier` - the minority probability is the fraction of
  label-1 points among the ``knn_k`` nearest pool points.  Updating appends
  to the pool, so duplicated synthetics act as extra votes.
* :class:`MLPClassifier` - ReLU network with a single sigmoid output trained
  on binary cross-entropy with Adam.  Updating runs a fixed number of
  warm-start mini-batch steps; every batch contains all new samples.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, LabeledSample
from .errors import DimensionMismatch, InvalidConfig, SingleClassData
from .neighbors import NeighborIndex
from .nn import Adam, DenseNet, sigmoid, softplus

__all__ = ["ClassifierSpec", "KNNClassifier", "MLPClassifier", "fit", "restore"]


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"
    knn_k: int = 10
    mlp_layers: tuple[int, ...] = (128, 64)
    mlp_learning_rate: float = 1e-3
    mlp_epochs_initial: int = 100
    mlp_steps_per_update: int = 20
    mlp_batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mlp_layers", tuple(int(w) for w in self.mlp_layers))
        if self.kind not in ("knn", "mlp"):
            raise InvalidConfig(f"unknown classifier kind {self.kind!r}")
        if self.knn_k < 1:
            raise InvalidConfig("knn_k must be >= 1")
        if not self.mlp_layers or min(self.mlp_layers) < 1:
            raise InvalidConfig("hidden widths must be >= 1")
        if self.mlp_learning_rate <= 0:
            raise InvalidConfig("mlp_learning_rate must be positive")
        for name in ("mlp_epochs_initial", "mlp_steps_per_update", "mlp_batch_size"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1")

    @property
    def name(self) -> str:
        return self.kind


def _as_arrays(samples: Sequence[LabeledSample], dim: int) -> tuple[np.ndarray, np.ndarray]:
    if len(samples) == 0:
        raise ValueError("no samples to add")
    X = np.stack([np.asarray(s.features, dtype=np.float64) for s in samples])
    if X.shape[1] != dim:
        raise DimensionMismatch(f"samples have dimension {X.shape[1]}, classifier expects {dim}")
    y = np.array([s.label for s in samples], dtype=np.int64)
    return X, y


class _Base:
    spec: ClassifierSpec
    dim: int

    def predict_proba(self, X):
        """P(y=1 | x) for a vector (returns a float) or a matrix of rows."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X2 = X[None, :] if single else X
        if X2.ndim != 2 or X2.shape[1] != self.dim:
            raise DimensionMismatch(f"expected inputs of dimension {self.dim}")
        p = self._proba(X2)
        return float(p[0]) if single else p

    def predict(self, X) -> np.ndarray:
        return (np.atleast_1d(self.predict_proba(X)) > 0.5).astype(np.int64)

    def snapshot(self):
        return copy.deepcopy(self)

    def add_samples(self, samples: Sequence[LabeledSample]):
        return self.update(samples)


class KNNClassifier(_Base):
    def __init__(self, spec: ClassifierSpec, train: Dataset):
        self.spec = spec
        self.dim = train.dim
        self.index = NeighborIndex(train.X, train.y)

    @property
    def pool(self) -> Dataset:
        return Dataset(self.index.points.copy(), self.index.labels.copy())

    @property
    def pool_size(self) -> int:
        return len(self.index)

    def _proba(self, X):
        return self.index.positive_fraction(X, self.spec.knn_k)

    def update(self, samples: Sequence[LabeledSample]) -> "KNNClassifier":
        X, y = _as_arrays(samples, self.dim)
        self.index.append(X, y)
        return self


class MLPClassifier(_Base):
    def __init__(self, spec: ClassifierSpec, train: Dataset):
        self.spec = spec
        self.dim = train.dim
        self.rng = np.random.default_rng(spec.seed)
        self.net = DenseNet([self.dim, *spec.mlp_layers, 1], rng=self.rng)
        self.opt = Adam(self.net.params, lr=spec.mlp_learning_rate)
        self._X = np.array(train.X, dtype=np.float64)
        self._y = np.array(train.y, dtype=np.float64)

    @property
    def pool(self) -> Dataset:
        return Dataset(self._X.copy(), self._y.astype(np.int64))

    @property
    def pool_size(self) -> int:
        return self._X.shape[0]

    def logits(self, X) -> np.ndarray:
        return self.net.forward(X)[:, 0]

    def _proba(self, X):
        return sigmoid(self.logits(X))

    def loss(self, X=None, y=None) -> float:
        """Mean binary cross-entropy, over the pool by default."""
        X = self._X if X is None else np.asarray(X, dtype=np.float64)
        y = self._y if y is None else np.asarray(y, dtype=np.float64)
        z = self.logits(X)
        return float(np.mean(softplus(z) - y * z))

    def gradients(self, X, y) -> list[np.ndarray]:
        """Analytic gradient of the mean BCE w.r.t. every parameter array."""
        y = np.asarray(y, dtype=np.float64)
        out, cache = self.net.forward(X, return_cache=True)
        dz = (sigmoid(out[:, 0]) - y) / y.shape[0]
        grads, _ = self.net.backward(cache, dz[:, None])
        return grads

    def _step(self, idx: np.ndarray) -> None:
        grads = self.gradients(self._X[idx], self._y[idx])
        self.opt.step(self.net.params, grads)

    def train_epochs(self, epochs: int) -> None:
        n = self._X.shape[0]
        bs = self.spec.mlp_batch_size
        for _ in range(epochs):
            perm = self.rng.permutation(n)
            for lo in range(0, n, bs):
                self._step(perm[lo:lo + bs])

    def update(self, samples: Sequence[LabeledSample]) -> "MLPClassifier":
        X, y = _as_arrays(samples, self.dim)
        n_old = self._X.shape[0]
        self._X = np.vstack([self._X, X])
        self._y = np.concatenate([self._y, y.astype(np.float64)])
        new_idx = np.arange(n_old, self._X.shape[0])
        fill = max(0, self.spec.mlp_batch_size - new_idx.size)
        for _ in range(self.spec.mlp_steps_per_update):
            extra = self.rng.choice(n_old, size=min(fill, n_old), replace=False) if fill else []
            self._step(np.concatenate([new_idx, np.asarray(extra, dtype=np.int64)]))
        return self


def fit(spec: ClassifierSpec, train: Dataset):
    """Fit a fresh classifier of ``spec.kind`` on ``train``."""
    if not train.has_both_classes():
        raise SingleClassData("training data must contain both classes")
    if spec.kind == "knn":
        return KNNClassifier(spec, train)
    clf = MLPClassifier(spec, train)
    clf.train_epochs(spec.mlp_epochs_initial)
    return clf


def restore(snapshot):
    """An independent working copy of a snapshot (the snapshot stays untouched)."""
    return snapshot.snapshot()
