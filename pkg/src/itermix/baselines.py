"""Classical minority oversamplers used as comparison baselines.

All generators take the training set and an :class:`OversampleRequest` and
return exactly ``n_synthetic`` labeled samples, deterministic for a seed.

The formulations are fixed here because the comparison only names them:
Borderline-SMOTE is the "borderline-1" variant (base points are DANGER
minorities, partners come from the minority class); ADASYN splits the
request with the largest-remainder method; the MixBoost-style mixer draws
its ratio from Beta(2, 5), a stand-in for the original distribution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import Dataset, LabeledSample
from .errors import InvalidConfig, SingleClassData, TooFewMinority
from .mixup import mix_features, mix_label
from .neighbors import NeighborIndex

logger = logging.getLogger(__name__)

SAFE, DANGER, NOISE = 0, 1, 2

MIXBOOST_BETA = (2.0, 5.0)


@dataclass(frozen=True)
class OversampleRequest:
    n_synthetic: int
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if int(self.n_synthetic) != self.n_synthetic or self.n_synthetic < 1:
            raise InvalidConfig(f"n_synthetic must be a positive integer, got {self.n_synthetic!r}")
        if self.k_neighbors < 1:
            raise InvalidConfig(f"k_neighbors must be >= 1, got {self.k_neighbors!r}")


def _minority(train: Dataset, need: int = 2) -> np.ndarray:
    Xm = train.X[train.y == 1]
    if Xm.shape[0] < need:
        raise TooFewMinority(f"need at least {need} minority samples, have {Xm.shape[0]}")
    return Xm


def _neighbors_excluding_self(index: NeighborIndex, queries: np.ndarray, self_ids: np.ndarray,
                              k: int) -> np.ndarray:
    """k nearest indexed points of each query, skipping the query's own slot."""
    idx, _ = index.k_nearest_batch(queries, k + 1)
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    for r in range(queries.shape[0]):
        row = idx[r][idx[r] != self_ids[r]]
        out[r] = row[:k]
    return out


def minority_neighbor_table(X_min: np.ndarray, k: int) -> np.ndarray:
    """Row i: indices (into ``X_min``) of the k nearest other minority points."""
    m = X_min.shape[0]
    k = min(k, m - 1)
    index = NeighborIndex(X_min, np.ones(m, np.int64))
    return _neighbors_excluding_self(index, X_min, np.arange(m), k)


def majority_fraction(train: Dataset, k: int) -> np.ndarray:
    """Share of majority points among each minority sample's k nearest others."""
    k = min(k, len(train) - 1)
    mins = np.flatnonzero(train.y == 1)
    index = NeighborIndex(train.X, train.y)
    nb = _neighbors_excluding_self(index, train.X[mins], mins, k)
    return (train.y[nb] == 0).sum(axis=1) / k


def _interpolate(X_min, bases, table, rng) -> list[np.ndarray]:
    out = []
    for b in bases:
        nb = table[b, rng.integers(table.shape[1])]
        u = rng.random()
        out.append((b, nb, mix_features(X_min[nb], X_min[b], u)))
    return out


def _as_samples(points) -> list[LabeledSample]:
    return [LabeledSample(p, 1) for p in points]


# ---------------------------------------------------------------------------


def random_oversample(train: Dataset, req: OversampleRequest) -> list[LabeledSample]:
    """Average two distinct, uniformly drawn minority samples per synthetic."""
    Xm = _minority(train)
    rng = np.random.default_rng(req.seed)
    out = []
    for _ in range(req.n_synthetic):
        i, j = rng.choice(Xm.shape[0], size=2, replace=False)
        out.append((Xm[i] + Xm[j]) / 2.0)
    return _as_samples(out)


def smote_details(train: Dataset, req: OversampleRequest, bases=None):
    """SMOTE synthetics plus the (base, neighbor) minority indices behind each.

    ``bases`` restricts the base points (indices into the minority subset);
    by default they are drawn uniformly from all minorities.
    """
    Xm = _minority(train)
    rng = np.random.default_rng(req.seed)
    table = minority_neighbor_table(Xm, req.k_neighbors)
    pool = np.arange(Xm.shape[0]) if bases is None else np.asarray(bases, dtype=np.int64)
    chosen = pool[rng.integers(pool.size, size=req.n_synthetic)]
    gen = _interpolate(Xm, chosen, table, rng)
    samples = _as_samples([g[2] for g in gen])
    return samples, np.array([g[0] for g in gen]), np.array([g[1] for g in gen])


def smote(train: Dataset, req: OversampleRequest) -> list[LabeledSample]:
    return smote_details(train, req)[0]


def borderline_categories(train: Dataset, k: int) -> np.ndarray:
    """SAFE / DANGER / NOISE code for each minority sample (in minority order)."""
    r = majority_fraction(train, k)
    cat = np.full(r.shape, SAFE, dtype=np.int64)
    cat[(r >= 0.5) & (r < 1.0)] = DANGER
    cat[r == 1.0] = NOISE
    return cat


def borderline_smote(train: Dataset, req: OversampleRequest) -> list[LabeledSample]:
    _minority(train)
    danger = np.flatnonzero(borderline_categories(train, req.k_neighbors) == DANGER)
    if danger.size == 0:
        logger.warning("no DANGER minority samples; falling back to plain SMOTE")
        return smote(train, req)
    return smote_details(train, req, bases=danger)[0]


def adasyn_allocation(train: Dataset, req: OversampleRequest) -> np.ndarray:
    """Synthetics per minority sample, proportional to local majority share."""
    _minority(train)
    w = majority_fraction(train, req.k_neighbors)
    if w.sum() == 0:
        w = np.ones_like(w)
    quotas = w / w.sum() * req.n_synthetic
    alloc = np.floor(quotas).astype(np.int64)
    short = req.n_synthetic - int(alloc.sum())
    if short > 0:
        order = np.argsort(-(quotas - alloc), kind="stable")
        alloc[order[:short]] += 1
    return alloc


def adasyn(train: Dataset, req: OversampleRequest) -> list[LabeledSample]:
    Xm = _minority(train)
    alloc = adasyn_allocation(train, req)
    rng = np.random.default_rng(req.seed)
    table = minority_neighbor_table(Xm, req.k_neighbors)
    bases = np.repeat(np.arange(Xm.shape[0]), alloc)
    return _as_samples([g[2] for g in _interpolate(Xm, bases, table, rng)])


def binary_entropy(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log(p) + (1.0 - p) * np.log1p(-p))
    return np.nan_to_num(h, nan=0.0)


def mixboost_base_weights(train: Dataset, classifier) -> np.ndarray:
    """Sampling distribution over minority samples, proportional to prediction entropy."""
    p = np.atleast_1d(classifier.predict_proba(train.X[train.y == 1]))
    h = binary_entropy(p)
    if h.sum() <= 0:
        return np.full(h.shape, 1.0 / h.size)
    return h / h.sum()


def mixboost(train: Dataset, classifier, req: OversampleRequest, eta: float = 0.3) -> list[LabeledSample]:
    """Mix an entropy-weighted minority sample with a random majority sample.

    The ratio is Beta(2, 5) distributed, so most synthetics lie near the
    majority partner; the hard label follows the ``eta`` threshold.
    """
    if not train.has_both_classes():
        raise SingleClassData("mixboost needs both classes")
    Xm = train.X[train.y == 1]
    Xn = train.X[train.y == 0]
    probs = mixboost_base_weights(train, classifier)
    rng = np.random.default_rng(req.seed)
    out = []
    for _ in range(req.n_synthetic):
        i = rng.choice(Xm.shape[0], p=probs)
        j = rng.integers(Xn.shape[0])
        a = float(rng.beta(*MIXBOOST_BETA))
        out.append(LabeledSample(mix_features(Xm[i], Xn[j], a), mix_label(1, 0, a, eta)))
    return out


BASELINES = ("random", "smote", "borderline_smote", "adasyn", "mixboost")


def oversample(name: str, train: Dataset, req: OversampleRequest, classifier=None,
               eta: float = 0.3) -> list[LabeledSample]:
    if name == "random":
        return random_oversample(train, req)
    if name == "smote":
        return smote(train, req)
    if name == "borderline_smote":
        return borderline_smote(train, req)
    if name == "adasyn":
        return adasyn(train, req)
    if name == "mixboost":
        if classifier is None:
            raise InvalidConfig("mixboost needs a fitted classifier")
        return mixboost(train, classifier, req, eta)
    raise InvalidConfig(f"unknown oversampler {name!r}")
