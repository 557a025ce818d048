"""Binary-labeled tabular datasets: CSV I/O, stratified splitting, toy data.

Label 1 is the minority (anomaly) class, label 0 the majority.  A
:class:`Dataset` stores its features as a read-only ``(n, d)`` float64 array
and its labels as a read-only int64 vector, so it can be shared freely.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._util import atomic_write_text, round_half_away
from .errors import (
    DimensionMismatch,
    InsufficientClassSamples,
    InvalidConfig,
    LabelError,
    MissingFile,
    ParseError,
)

__all__ = [
    "LabeledSample",
    "Dataset",
    "SplitSpec",
    "load_csv",
    "save_csv",
    "dumps_csv",
    "split_indices",
    "split",
    "make_toy",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledSample:
    features: np.ndarray
    label: int

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        if self.label not in (0, 1):
            raise LabelError(f"label must be 0 or 1, got {self.label!r}")
        object.__setattr__(self, "features", _readonly(x))
        object.__setattr__(self, "label", int(self.label))

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.features, other.features)

    def __hash__(self):
        return hash((self.label, self.features.tobytes()))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix plus binary labels."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 1)
        y = np.array(self.y, dtype=np.int64).reshape(-1)
        if X.ndim != 2:
            raise DimensionMismatch("X must be two-dimensional")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if X.shape[1] < 1:
            raise DimensionMismatch("dimension must be positive")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise LabelError("labels must be 0 or 1")
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != X.shape[1]:
                raise DimensionMismatch("feature_names length differs from dimension")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], dim: int | None = None) -> "Dataset":
        if not samples:
            if dim is None:
                raise ValueError("dim is required for an empty sample list")
            return cls(np.empty((0, dim)), np.empty(0, dtype=np.int64))
        dims = {s.features.shape[0] for s in samples}
        if len(dims) != 1 or (dim is not None and dims != {dim}):
            raise DimensionMismatch(f"inconsistent sample dimensions {sorted(dims)}")
        return cls(np.stack([s.features for s in samples]), [s.label for s in samples])

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> LabeledSample:
        return LabeledSample(self.X[i], int(self.y[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[LabeledSample]:
        return list(self)

    @property
    def n_minority(self) -> int:
        return int(self.y.sum())

    @property
    def n_majority(self) -> int:
        return len(self) - self.n_minority

    def has_both_classes(self) -> bool:
        return 0 < self.n_minority < len(self)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.feature_names)

    def extend(self, samples: Iterable[LabeledSample]) -> "Dataset":
        samples = list(samples)
        if not samples:
            return self
        extra = Dataset.from_samples(samples, self.dim)
        return Dataset(np.vstack([self.X, extra.X]), np.concatenate([self.y, extra.y]),
                       self.feature_names)

    def equals(self, other: "Dataset") -> bool:
        return (self.X.shape == other.X.shape and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _parse_label(cell: str, row: int) -> int:
    try:
        v = float(cell)
    except ValueError:
        raise LabelError(f"row {row}: label {cell!r} is not 0 or 1") from None
    if v not in (0.0, 1.0):
        raise LabelError(f"row {row}: label {cell!r} is not 0 or 1")
    return int(v)


def load_csv(path) -> Dataset:
    """Read a comma-separated file whose last column is named ``label``.

    Raises
    ------
    MissingFile
        If ``path`` does not exist.
    ParseError
        On a non-numeric or non-finite feature cell.  Rows and columns are
        1-based and count data rows only (the header is not row 1).
    LabelError
        If the last header is not ``label`` or a label is not 0/1.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(0, 0, "<empty file>") from None
        if len(header) < 2 or header[-1] != "label":
            raise LabelError("final header column must be named 'label'")
        d = len(header) - 1
        rows, labels = [], []
        for r, cells in enumerate(reader, start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != d + 1:
                raise ParseError(r, min(len(cells), d + 1), ",".join(cells))
            feats = []
            for c, cell in enumerate(cells[:-1], start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(r, c, cell) from None
                if not math.isfinite(v):
                    raise ParseError(r, c, cell)
                feats.append(v)
            rows.append(feats)
            labels.append(_parse_label(cells[-1].strip(), r))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), d)
    return Dataset(X, np.array(labels, dtype=np.int64), tuple(header[:-1]))


def dumps_csv(dataset: Dataset) -> str:
    names = dataset.feature_names or tuple(f"f{j + 1}" for j in range(dataset.dim))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*names, "label"])
    for x, y in zip(dataset.X, dataset.y):
        # repr() of a float round-trips exactly
        w.writerow([repr(float(v)) for v in x] + [int(y)])
    return buf.getvalue()


def save_csv(dataset: Dataset, path) -> None:
    atomic_write_text(path, dumps_csv(dataset))


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    val_fraction_of_train: float = 0.2
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("test_fraction", "val_fraction_of_train"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidConfig(f"{name} must lie in (0, 1), got {v}")


def _largest_remainder(quotas: np.ndarray, total: int) -> np.ndarray:
    base = np.floor(quotas).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        frac = quotas - base
        # stable: equal remainders resolved in class order
        order = np.argsort(-frac, kind="stable")
        base[order[:short]] += 1
    return base


def _stratified_counts(class_sizes: np.ndarray, total: int) -> np.ndarray:
    n = class_sizes.sum()
    alloc = _largest_remainder(class_sizes * (total / n), total)
    # every class must appear in the partition
    for c in np.flatnonzero(alloc == 0):
        donors = np.flatnonzero(alloc > 1)
        if donors.size == 0:
            break
        alloc[donors[np.argmax(alloc[donors])]] -= 1
        alloc[c] += 1
    return alloc


def split_indices(dataset: Dataset, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partition row indices into (train, val, test), each sorted ascending.

    ``|test| = round(test_fraction * N)`` and
    ``|val| = round(val_fraction_of_train * (N - |test|))`` with halves
    rounded away from zero; train takes the remainder.
    """
    n = len(dataset)
    if n == 0:
        raise InvalidConfig("cannot split an empty dataset")
    n_test = round_half_away(spec.test_fraction * n)
    n_val = round_half_away(spec.val_fraction_of_train * (n - n_test))
    rng = np.random.default_rng(spec.seed)

    if not spec.stratified:
        if n_test + n_val >= n:
            raise InsufficientClassSamples("split leaves no training samples")
        perm = rng.permutation(n)
        test = perm[:n_test]
        val = perm[n_test:n_test + n_val]
        train = perm[n_test + n_val:]
        return np.sort(train), np.sort(val), np.sort(test)

    classes = [np.flatnonzero(dataset.y == c) for c in (0, 1)]
    classes = [c for c in classes if c.size]
    sizes = np.array([c.size for c in classes], dtype=np.int64)
    if np.any(sizes < 3):
        raise InsufficientClassSamples(
            f"stratified split needs >= 3 samples per class, got {sizes.tolist()}")
    test_c = _stratified_counts(sizes, n_test)
    val_c = _stratified_counts(sizes - test_c, n_val)
    train_c = sizes - test_c - val_c
    if np.any(test_c < 1) or np.any(val_c < 1) or np.any(train_c < 1):
        raise InsufficientClassSamples(
            "a class cannot appear in all of train/val/test under these fractions")
    parts = ([], [], [])
    for members, nt, nv in zip(classes, test_c, val_c):
        perm = rng.permutation(members)
        parts[2].append(perm[:nt])
        parts[1].append(perm[nt:nt + nv])
        parts[0].append(perm[nt + nv:])
    train, val, test = (np.sort(np.concatenate(p)) for p in parts)
    return train, val, test


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    tr, va, te = split_indices(dataset, spec)
    return dataset.subset(tr), dataset.subset(va), dataset.subset(te)


# ---------------------------------------------------------------------------
# toy data
# ---------------------------------------------------------------------------

# minority cluster stddev as a multiple of ``spread``
TOY_CLUSTER_SCALE = 0.35


def make_toy(majority_count: int = 600, minority_count: int = 30, minority_clusters: int = 3,
             spread: float = 1.0, seed: int = 0) -> Dataset:
    """Two-dimensional imbalanced toy data with scattered minority clusters.

    Majority points come from an isotropic Gaussian at the origin with
    standard deviation ``spread``.  Minority points are split evenly over
    ``minority_clusters`` Gaussian blobs (standard deviation
    ``0.35 * spread``) whose centers sit at evenly spaced angles, randomly
    rotated, on a ring of radius ``3 * spread``.  Majority rows come first.
    """
    for name, v in (("majority_count", majority_count), ("minority_count", minority_count),
                    ("minority_clusters", minority_clusters)):
        if int(v) != v or v < 1:
            raise InvalidConfig(f"{name} must be a positive integer, got {v!r}")
    if not spread > 0:
        raise InvalidConfig(f"spread must be positive, got {spread!r}")
    if minority_clusters > minority_count:
        raise InvalidConfig("minority_clusters cannot exceed minority_count")

    rng = np.random.default_rng(seed)
    majority = rng.normal(0.0, spread, size=(majority_count, 2))
    offset = rng.uniform(0.0, 2.0 * np.pi)
    sizes = np.full(minority_clusters, minority_count // minority_clusters)
    sizes[: minority_count % minority_clusters] += 1
    blobs = []
    for j, size in enumerate(sizes):
        theta = offset + 2.0 * np.pi * j / minority_clusters
        center = 3.0 * spread * np.array([np.cos(theta), np.sin(theta)])
        blobs.append(center + rng.normal(0.0, TOY_CLUSTER_SCALE * spread, size=(size, 2)))
    X = np.vstack([majority, *blobs])
    y = np.concatenate([np.zeros(majority_count, np.int64), np.ones(minority_count, np.int64)])
    return Dataset(X, y, ("x1", "x2"))
