"""Iterative mix-up as a sequential decision process.

A state is a pair of opposite-label samples ``(x0, x1)`` taken from the
working pool (training data plus the synthetics generated so far in the
episode).  An action ``(k, alpha, n, epsilon)`` mixes the pair into ``n``
identical synthetic samples, feeds them to the classifier, and moves to a
new pair: ``x0`` is drawn uniformly from the ``k`` nearest pool points of
the synthetic sample and ``x1`` is the nearest pool point with the other
label.  The episode ends once ``epsilon >= 0.5`` or after ``T_max`` steps.

The reward is ``lambda * delta_m * confidence`` where ``delta_m`` is the
validation macro-F1 gain over the mean of the last ``m_win`` scores (the
pretrained score when there is no history yet) and ``confidence`` is the
mean of ``p * (1 - p)`` over the same ``k`` neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset, LabeledSample
from .errors import EmptyNeighborhood, InvalidConfig, NoOppositeLabel, NoSuchLabel, SingleClassData
from .metrics import macro_f1
from .mixup import MixConfig, SourcePair, synthesize
from .neighbors import NeighborIndex

REWARD_MODES = ("full", "random", "no_improvement", "no_exploration")


@dataclass(frozen=True)
class EnvConfig:
    K: int = 10
    N_max: int = 5
    eta: float = 0.3
    lam: float = 10.0
    m_win: int = 25
    T_max: int = 50
    metric: str = "macro_f1"
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.N_max < 1 or self.T_max < 1:
            raise InvalidConfig("K, N_max and T_max must be >= 1")
        if not self.lam > 0:
            raise InvalidConfig("lambda must be positive")
        if self.m_win < 2:
            raise InvalidConfig("m_win must be >= 2")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidConfig("eta must lie in [0, 1]")
        if self.metric != "macro_f1":
            raise InvalidConfig(f"unsupported metric {self.metric!r}")


@dataclass(frozen=True)
class Action:
    k: int
    alpha: float
    n: int
    epsilon: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1 or int(self.n) != self.n or self.n < 1:
            raise InvalidConfig(f"k and n must be positive integers, got k={self.k}, n={self.n}")
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.epsilon <= 1.0):
            raise InvalidConfig("alpha and epsilon must lie in [0, 1]")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))

    def check_bounds(self, cfg: EnvConfig) -> None:
        if self.k > cfg.K or self.n > cfg.N_max:
            raise InvalidConfig(f"action (k={self.k}, n={self.n}) exceeds K={cfg.K}, N_max={cfg.N_max}")


@dataclass(frozen=True, eq=False)
class State:
    x0: LabeledSample
    x1: LabeledSample
    i0: int = -1
    i1: int = -1

    def __post_init__(self):
        if self.x0.label == self.x1.label:
            raise ValueError("state samples must have different labels")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x0.features, self.x1.features])

    @property
    def pair(self) -> SourcePair:
        return SourcePair(self.x0, self.x1)


@dataclass(eq=False)
class StepOutcome:
    next_state: State
    reward: float
    synthetics: list[LabeledSample]
    terminal: bool
    delta_m: float
    confidence: float
    val_score: float
    neighbors: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))


def state_at(index: NeighborIndex, i0: int) -> State:
    """State whose ``x0`` is pool point ``i0`` and ``x1`` its nearest opposite-label point."""
    y0 = int(index.labels[i0])
    x0 = index.points[i0]
    try:
        i1, _ = index.nearest_with_label(x0, 1 - y0)
    except NoSuchLabel:
        raise NoOppositeLabel(f"pool has no point labeled {1 - y0}") from None
    return State(LabeledSample(x0, y0), LabeledSample(index.points[i1], 1 - y0), int(i0), int(i1))


def initial_state(train, rng: np.random.Generator) -> State:
    """Uniform ``x0`` from ``train`` (a Dataset or NeighborIndex) plus its opposite-label partner."""
    index = train if isinstance(train, NeighborIndex) else NeighborIndex(train.X, train.y)
    labels = index.labels
    if labels.min() == labels.max():
        raise SingleClassData("both classes are required")
    return state_at(index, int(rng.integers(len(index))))


def improvement_stimulation(history, current: float, baseline0: float, m_win: int) -> float:
    """``current`` minus the mean of the last ``m_win`` scores (``baseline0`` if none)."""
    if len(history) == 0:
        return float(current) - float(baseline0)
    window = list(history)[-m_win:]
    return float(current) - float(np.mean(window))


def model_exploration(classifier, neighbor_points) -> float:
    """Mean of ``P(y=1|x) * P(y=0|x)`` over the given points; lies in [0, 0.25]."""
    pts = np.asarray(neighbor_points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[0] == 0:
        raise EmptyNeighborhood("no neighbor points")
    p = np.atleast_1d(classifier.predict_proba(pts))
    return float(np.mean(p * (1.0 - p)))


def validation_score(classifier, val: Dataset) -> float:
    """Macro-F1 of the classifier on ``val`` at the 0.5 threshold."""
    return macro_f1(val.y, classifier.predict(val.X))


Scorer = Callable[[object, Dataset], float]


class MixupEnv:
    """Episode driver owning the working pool and the classifier being augmented.

    ``classifier`` must provide ``predict_proba``, ``update`` and
    ``snapshot``.  With ``reset_classifier`` (the default) every episode starts
    from a copy of the classifier as it was passed in; otherwise updates
    accumulate across episodes.
    """

    def __init__(self, train: Dataset, val: Dataset, classifier, cfg: EnvConfig,
                 reward_mode: str = "full", scorer: Scorer = validation_score,
                 seed: int | None = None, reset_classifier: bool = True):
        if reward_mode not in REWARD_MODES:
            raise InvalidConfig(f"unknown reward mode {reward_mode!r}")
        if not train.has_both_classes():
            raise SingleClassData("training data must contain both classes")
        if val.dim != train.dim:
            raise InvalidConfig("train and validation dimensions differ")
        self.train = train
        self.val = val
        self.cfg = cfg
        self.reward_mode = reward_mode
        self.scorer = scorer
        self.reset_classifier = reset_classifier
        self.mix_cfg = MixConfig(cfg.eta)
        seq = np.random.SeedSequence(cfg.seed if seed is None else seed)
        s_state, s_reward = seq.spawn(2)
        self.rng = np.random.default_rng(s_state)
        self.reward_rng = np.random.default_rng(s_reward)
        self.pretrained = classifier.snapshot()
        self.baseline0 = float(scorer(classifier, val))
        self.classifier = classifier
        self.pool = NeighborIndex(train.X, train.y)
        self.history: list[float] = []
        self.t = 0
        self.state: State | None = None

    def reset(self) -> State:
        if self.reset_classifier:
            self.classifier = self.pretrained.snapshot()
            self.pool = NeighborIndex(self.train.X, self.train.y)
            self.history = []
        self.t = 0
        self.state = initial_state(self.pool, self.rng)
        return self.state

    def _reward(self, delta_m: float, confidence: float, score: float) -> float:
        lam = self.cfg.lam
        if self.reward_mode == "full":
            return lam * delta_m * confidence
        if self.reward_mode == "random":
            return float(self.reward_rng.random())
        if self.reward_mode == "no_improvement":
            return lam * score * confidence
        return lam * delta_m

    def step(self, action: Action) -> StepOutcome:
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        action.check_bounds(self.cfg)
        state = self.state
        synthetics = synthesize(state.pair, action.alpha, action.n, self.mix_cfg)
        x_syn = synthetics[0].features
        self.classifier.update(synthetics)
        self.pool.append(np.repeat(x_syn[None, :], action.n, axis=0),
                         np.full(action.n, synthetics[0].label))

        score = float(self.scorer(self.classifier, self.val))
        delta_m = improvement_stimulation(self.history, score, self.baseline0, self.cfg.m_win)
        self.history.append(score)
        nb, _ = self.pool.k_nearest(x_syn, action.k)
        confidence = model_exploration(self.classifier, self.pool.points[nb])
        reward = self._reward(delta_m, confidence, score)

        nxt = state_at(self.pool, int(nb[self.rng.integers(nb.size)]))
        self.t += 1
        terminal = action.epsilon >= 0.5 or self.t >= self.cfg.T_max
        self.state = nxt
        return StepOutcome(nxt, float(reward), synthetics, bool(terminal), delta_m, confidence,
                           score, nb)
