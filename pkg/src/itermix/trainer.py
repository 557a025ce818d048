"""Policy training, greedy rollout and multi-seed experiments."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .agent import ActionBounds, AgentConfig, DDPGAgent, TransitionRecord, to_env_action
from .baselines import BASELINES, OversampleRequest, oversample
from .classifiers import ClassifierSpec, fit
from .data import Dataset, LabeledSample, SplitSpec, split
from .env import REWARD_MODES, EnvConfig, MixupEnv, validation_score
from .errors import DimensionMismatch, InvalidConfig, SingleClassData
from .metrics import MacroScores, confusion, macro_scores, mean_scores

logger = logging.getLogger(__name__)

METHODS = ("none", *BASELINES, "mixann")


@dataclass(frozen=True)
class TrainConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    episodes: int = 100
    reward_mode: str = "full"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    rollouts: int = 5
    reset_classifier: bool = True
    split: SplitSpec = field(default_factory=SplitSpec)
    n_synthetic: int | None = None
    k_neighbors: int = 5

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.episodes < 1:
            raise InvalidConfig("episodes must be >= 1")
        if not self.seeds:
            raise InvalidConfig("seeds must not be empty")
        if self.rollouts < 1:
            raise InvalidConfig("rollouts must be >= 1")
        if self.reward_mode not in REWARD_MODES:
            raise InvalidConfig(f"unknown reward_mode {self.reward_mode!r}")
        if self.n_synthetic is not None and (int(self.n_synthetic) != self.n_synthetic
                                             or self.n_synthetic < 1):
            raise InvalidConfig("n_synthetic must be a positive integer or null")
        if self.k_neighbors < 1:
            raise InvalidConfig("k_neighbors must be >= 1")


def derive_seed(*parts: int) -> int:
    """Independent 32-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


def _noise_level(cfg: AgentConfig, episode: int, episodes: int) -> float:
    if episodes <= 1:
        return cfg.noise_sigma
    frac = episode / (episodes - 1)
    return cfg.noise_sigma + (cfg.noise_sigma_final - cfg.noise_sigma) * frac


@dataclass
class PolicyTrace:
    steps: list[dict] = field(default_factory=list)
    episode_lengths: list[int] = field(default_factory=list)
    n_updates: int = 0
    baseline0: float = 0.0

    def rewards(self) -> np.ndarray:
        return np.array([s["reward"] for s in self.steps])


def _step_record(episode, t, state, raw, action, out) -> dict:
    return {
        "episode": episode,
        "step": t,
        "i0": state.i0,
        "i1": state.i1,
        "raw": [float(v) for v in raw],
        "action": {"k": action.k, "alpha": action.alpha, "n": action.n, "epsilon": action.epsilon},
        "label": out.synthetics[0].label,
        "reward": out.reward,
        "delta_m": out.delta_m,
        "confidence": out.confidence,
        "val_score": out.val_score,
        "terminal": out.terminal,
    }


def train_policy(cfg: TrainConfig, train: Dataset, val: Dataset, *, seed: int | None = None,
                 agent: DDPGAgent | None = None, classifier=None, scorer=validation_score,
                 episode_hook: Callable[[int, MixupEnv], None] | None = None):
    """Learn a mixing policy on ``train`` with rewards measured on ``val``.

    The classifier is fitted once; with ``cfg.reset_classifier`` each episode
    restarts from that fitted state and from the original training pool.
    The agent is only updated once its buffer holds a full batch.

    Returns ``(agent, trace)``.
    """
    if train.dim != val.dim:
        raise DimensionMismatch("train and validation dimensions differ")
    if not train.has_both_classes():
        raise SingleClassData("training data must contain both classes")
    seed = cfg.env.seed if seed is None else seed
    if classifier is None:
        classifier = fit(replace(cfg.classifier, seed=derive_seed(seed, 1)), train)
    env = MixupEnv(train, val, classifier, cfg.env, reward_mode=cfg.reward_mode, scorer=scorer,
                   seed=derive_seed(seed, 2), reset_classifier=cfg.reset_classifier)
    if agent is None:
        agent = DDPGAgent(2 * train.dim, replace(cfg.agent, seed=derive_seed(seed, 3)))
    bounds = ActionBounds.from_env(cfg.env)
    trace = PolicyTrace(baseline0=env.baseline0)

    for episode in range(cfg.episodes):
        sigma = _noise_level(agent.cfg, episode, cfg.episodes)
        state = env.reset()
        if episode_hook is not None:
            episode_hook(episode, env)
        t = 0
        while True:
            raw = agent.act(state.vector, sigma)
            action = to_env_action(raw, bounds)
            out = env.step(action)
            agent.buffer.push(TransitionRecord(state.vector, raw, out.reward,
                                               out.next_state.vector, out.terminal))
            trace.steps.append(_step_record(episode, t, state, raw, action, out))
            t += 1
            if agent.ready():
                for _ in range(agent.cfg.updates_per_step):
                    agent.train_step()
            state = out.next_state
            if out.terminal:
                break
        trace.episode_lengths.append(t)
    trace.n_updates = agent.n_updates
    return agent, trace


def final_rollout(agent: DDPGAgent, train: Dataset, cfg: TrainConfig, *, val: Dataset | None = None,
                  classifier=None, seed: int = 0, rollouts: int | None = None) -> list[LabeledSample]:
    """Run noise-free episodes from independent start pairs and pool their synthetics.

    Each episode starts from the same freshly fitted classifier.
    """
    rollouts = cfg.rollouts if rollouts is None else rollouts
    if classifier is None:
        classifier = fit(replace(cfg.classifier, seed=derive_seed(seed, 1)), train)
    env = MixupEnv(train, train if val is None else val, classifier, cfg.env,
                   seed=derive_seed(seed, 4), reset_classifier=True)
    bounds = ActionBounds.from_env(cfg.env)
    out_samples: list[LabeledSample] = []
    for _ in range(rollouts):
        state = env.reset()
        while True:
            action = to_env_action(agent.act(state.vector, 0.0), bounds)
            out = env.step(action)
            out_samples.extend(out.synthetics)
            state = out.next_state
            if out.terminal:
                break
    return out_samples


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass
class SeedResult:
    seed: int
    scores: MacroScores
    n_synthetic: int
    n_synthetic_minority: int
    episode_lengths: list[int] = field(default_factory=list)
    # populated only on request (run_seed(..., keep=True)); never serialized
    synthetics: list[LabeledSample] | None = field(default=None, repr=False)
    classifier: object = field(default=None, repr=False)
    trace: list[dict] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {"seed": self.seed, **self.scores.to_dict(), "n_synthetic": self.n_synthetic,
             "n_synthetic_minority": self.n_synthetic_minority}
        if self.episode_lengths:
            d["mean_episode_length"] = float(np.mean(self.episode_lengths))
            d["max_episode_length"] = int(np.max(self.episode_lengths))
        return d


@dataclass
class ExperimentReport:
    method: str
    classifier: str
    per_seed: list[SeedResult]
    mean: MacroScores

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "classifier": self.classifier,
            "mean": self.mean.to_dict(),
            "per_seed": [r.to_dict() for r in self.per_seed],
            "synthetics": {
                "total": int(sum(r.n_synthetic for r in self.per_seed)),
                "minority": int(sum(r.n_synthetic_minority for r in self.per_seed)),
            },
        }


def augment(method: str, cfg: TrainConfig, train: Dataset, val: Dataset, seed: int):
    """Synthetic samples produced by ``method`` for one seed, plus the policy trace.

    The trace is ``None`` for every method except ``mixann``.
    """
    if method == "none":
        return [], None
    if method == "mixann":
        agent, trace = train_policy(cfg, train, val, seed=seed)
        return final_rollout(agent, train, cfg, val=val, seed=seed), trace
    if method not in BASELINES:
        raise InvalidConfig(f"unknown method {method!r}; expected one of {METHODS}")
    n_syn = cfg.n_synthetic
    if n_syn is None:
        n_syn = train.n_majority - train.n_minority
        if n_syn < 1:
            return [], None
    req = OversampleRequest(n_synthetic=n_syn, k_neighbors=cfg.k_neighbors,
                            seed=derive_seed(seed, 5))
    clf = None
    if method == "mixboost":
        clf = fit(replace(cfg.classifier, seed=derive_seed(seed, 1)), train)
    return oversample(method, train, req, classifier=clf, eta=cfg.env.eta), None


def run_seed(cfg: TrainConfig, dataset: Dataset, method: str, seed: int, keep: bool = False) -> SeedResult:
    """One seed of the protocol; ``keep`` attaches synthetics, final classifier and trace."""
    train, val, test = split(dataset, replace(cfg.split, seed=derive_seed(cfg.split.seed, seed)))
    synthetics, trace = augment(method, cfg, train, val, seed)
    augmented = train.extend(synthetics)
    clf = fit(replace(cfg.classifier, seed=derive_seed(seed, 6)), augmented)
    scores = macro_scores(confusion(test.y, clf.predict(test.X)))
    n_min = int(sum(s.label for s in synthetics))
    lengths = [] if trace is None else list(trace.episode_lengths)
    result = SeedResult(seed, scores, len(synthetics), n_min, lengths)
    if keep:
        result.synthetics = list(synthetics)
        result.classifier = clf
        result.trace = None if trace is None else trace.steps
    return result


def run_experiment(cfg: TrainConfig, dataset: Dataset, method: str, *, jobs: int = 1,
                   keep: bool = False) -> ExperimentReport:
    """Split, augment, refit and score on the test split, once per seed.

    The test split is only touched by the final scoring call.
    """
    if method not in METHODS:
        raise InvalidConfig(f"unknown method {method!r}; expected one of {METHODS}")
    if jobs > 1 and len(cfg.seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            n = len(cfg.seeds)
            results = list(pool.map(run_seed, [cfg] * n, [dataset] * n, [method] * n, cfg.seeds,
                                    [keep] * n))
    else:
        results = [run_seed(cfg, dataset, method, s, keep) for s in cfg.seeds]
    for r in results:
        logger.info("%s/%s seed %d: f1=%.4f (%d synthetics)", method, cfg.classifier.kind, r.seed,
                    r.scores.f1, r.n_synthetic)
    return ExperimentReport(method, cfg.classifier.kind, results, mean_scores(r.scores for r in results))


def config_dict(cfg: TrainConfig) -> dict:
    d = asdict(cfg)
    d["env"]["lambda"] = d["env"].pop("lam")
    return d
