"""Strict JSON experiment configuration.

A config file is one JSON object::

    {
      "dataset": {"toy": {"majority_count": 600, "minority_count": 30}},
      "methods": ["none", "smote", "mixann"],
      "classifiers": ["knn"],
      "env": {"K": 10, "lambda": 10.0},
      "agent": {"noise_sigma": 0.1},
      "classifier": {"knn_k": 10},
      "split": {"test_fraction": 0.2},
      "train": {"episodes": 100, "seeds": [0, 1, 2, 3, 4]},
      "grid_size": 200,
      "trace": false,
      "out": "results"
    }

Only ``dataset`` and ``methods`` are required; every other key falls back to
the defaults of the corresponding dataclass.  Unknown keys, wrong types and
out-of-range values are rejected with an :class:`InvalidConfig` whose message
starts with the dotted path of the offending key.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .agent import AgentConfig
from .classifiers import ClassifierSpec
from .data import Dataset, SplitSpec, load_csv, make_toy
from .env import EnvConfig
from .errors import InvalidConfig, MissingFile
from .trainer import METHODS, TrainConfig

CLASSIFIER_KINDS = ("knn", "mlp")

# value kinds understood by _check
INT, FLOAT, BOOL, STR, INT_LIST, OPT_INT, OPT_FLOAT = ("int", "float", "bool", "str", "int list",
                                                       "int or null", "float or null")

ENV_KEYS = {"K": INT, "N_max": INT, "eta": FLOAT, "lambda": FLOAT, "m_win": INT, "T_max": INT,
            "metric": STR}
AGENT_KEYS = {"gamma": FLOAT, "actor_lr": FLOAT, "critic_lr": FLOAT, "batch_size": INT,
              "noise_sigma": FLOAT, "noise_sigma_final": FLOAT, "tau": FLOAT, "use_targets": BOOL,
              "updates_per_step": INT, "hidden": INT_LIST, "raw_bound": OPT_FLOAT,
              "buffer_capacity": INT}
CLASSIFIER_KEYS = {"knn_k": INT, "mlp_layers": INT_LIST, "mlp_learning_rate": FLOAT,
                   "mlp_epochs_initial": INT, "mlp_steps_per_update": INT, "mlp_batch_size": INT}
SPLIT_KEYS = {"test_fraction": FLOAT, "val_fraction_of_train": FLOAT, "stratified": BOOL, "seed": INT}
TRAIN_KEYS = {"episodes": INT, "reward_mode": STR, "seeds": INT_LIST, "rollouts": INT,
              "reset_classifier": BOOL, "n_synthetic": OPT_INT, "k_neighbors": INT}
TOY_KEYS = {"majority_count": INT, "minority_count": INT, "minority_clusters": INT, "spread": FLOAT,
            "seed": INT}
TOP_KEYS = {"dataset", "methods", "classifiers", "env", "agent", "classifier", "split", "train",
            "grid_size", "trace", "out"}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check(path: str, value, kind: str):
    """Type-check one JSON value, returning it in its Python form."""
    if kind in (OPT_INT, OPT_FLOAT) and value is None:
        return None
    if kind in (INT, OPT_INT):
        if not _is_int(value):
            raise InvalidConfig(f"{path}: expected an integer, got {value!r}")
        return value
    if kind in (FLOAT, OPT_FLOAT):
        if not (_is_int(value) or isinstance(value, float)) or not math.isfinite(value):
            raise InvalidConfig(f"{path}: expected a finite number, got {value!r}")
        return float(value)
    if kind == BOOL:
        if not isinstance(value, bool):
            raise InvalidConfig(f"{path}: expected true or false, got {value!r}")
        return value
    if kind == STR:
        if not isinstance(value, str):
            raise InvalidConfig(f"{path}: expected a string, got {value!r}")
        return value
    if kind == INT_LIST:
        if not isinstance(value, list) or not all(_is_int(v) for v in value):
            raise InvalidConfig(f"{path}: expected a list of integers, got {value!r}")
        return tuple(value)
    raise AssertionError(kind)


def _object(path: str, value) -> dict:
    if not isinstance(value, dict):
        raise InvalidConfig(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _section(path: str, raw, keys: dict, cls, rename: dict | None = None, **fixed):
    """Validate one section key by key, then build ``cls`` from it."""
    raw = _object(path, raw)
    rename = rename or {}
    kwargs = {}
    for key, value in raw.items():
        if key not in keys:
            raise InvalidConfig(f"{path}.{key}: unknown key (allowed: {', '.join(sorted(keys))})")
        kwargs[rename.get(key, key)] = _check(f"{path}.{key}", value, keys[key])
    # range checks one key at a time so the message can name the culprit
    for key, value in kwargs.items():
        try:
            cls(**{**fixed, key: value})
        except InvalidConfig as exc:
            shown = {v: k for k, v in rename.items()}.get(key, key)
            raise InvalidConfig(f"{path}.{shown}: {exc}") from None
    try:
        return cls(**fixed, **kwargs)
    except InvalidConfig as exc:
        raise InvalidConfig(f"{path}: {exc}") from None


@dataclass(frozen=True)
class DatasetSource:
    """Either toy-generator parameters or a CSV path."""

    toy: dict | None = None
    csv: str | None = None

    def load(self) -> Dataset:
        if self.csv is not None:
            return load_csv(self.csv)
        return make_toy(**self.toy)

    def echo(self) -> dict:
        return {"toy": dict(self.toy)} if self.csv is None else {"csv": Path(self.csv).name}


def _dataset(raw, base_dir: Path) -> DatasetSource:
    raw = _object("dataset", raw)
    if len(raw) != 1 or next(iter(raw)) not in ("toy", "csv"):
        raise InvalidConfig("dataset: expected exactly one of 'toy' or 'csv'")
    if "csv" in raw:
        p = Path(_check("dataset.csv", raw["csv"], STR))
        return DatasetSource(csv=str(p if p.is_absolute() else base_dir / p))
    toy = _object("dataset.toy", raw["toy"])
    params = {"majority_count": 600, "minority_count": 30, "minority_clusters": 3, "spread": 1.0, "seed": 0}
    for key, value in toy.items():
        if key not in TOY_KEYS:
            raise InvalidConfig(f"dataset.toy.{key}: unknown key (allowed: {', '.join(sorted(TOY_KEYS))})")
        params[key] = _check(f"dataset.toy.{key}", value, TOY_KEYS[key])
    for key in ("majority_count", "minority_count", "minority_clusters"):
        if params[key] < 1:
            raise InvalidConfig(f"dataset.toy.{key}: must be >= 1")
    if not params["spread"] > 0:
        raise InvalidConfig("dataset.toy.spread: must be positive")
    return DatasetSource(toy=params)


def _names(path: str, raw, allowed) -> tuple[str, ...]:
    if not isinstance(raw, list) or not raw or not all(isinstance(v, str) for v in raw):
        raise InvalidConfig(f"{path}: expected a non-empty list of names")
    for v in raw:
        if v not in allowed:
            raise InvalidConfig(f"{path}: unknown entry {v!r} (allowed: {', '.join(allowed)})")
    if len(set(raw)) != len(raw):
        raise InvalidConfig(f"{path}: duplicate entries")
    return tuple(raw)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    methods: tuple[str, ...]
    train: TrainConfig
    classifiers: tuple[str, ...] = ("knn",)
    grid_size: int = 200
    trace: bool = False
    out: str = "results"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def train_for(self, kind: str) -> TrainConfig:
        return replace(self.train, classifier=replace(self.train.classifier, kind=kind))

    def with_seed_offset(self, offset: int) -> "ExperimentConfig":
        seeds = tuple(s + offset for s in self.train.seeds)
        return replace(self, train=replace(self.train, seeds=seeds))

    def echo(self) -> dict:
        """Fully resolved settings (defaults filled in) for embedding in reports."""
        t = asdict(self.train)
        env = t.pop("env")
        env["lambda"] = env.pop("lam")
        env.pop("seed")
        agent = t.pop("agent")
        agent.pop("seed")
        clf = t.pop("classifier")
        for key in ("kind", "seed"):
            clf.pop(key)
        split = t.pop("split")
        t["seeds"] = list(t["seeds"])
        agent["hidden"] = list(agent["hidden"])
        clf["mlp_layers"] = list(clf["mlp_layers"])
        return {"dataset": self.dataset.echo(), "methods": list(self.methods),
                "classifiers": list(self.classifiers), "env": env, "agent": agent,
                "classifier": clf, "split": split, "train": t, "grid_size": self.grid_size,
                "trace": self.trace}


def parse_config(raw, base_dir: Path | str = ".") -> ExperimentConfig:
    raw = _object("config", raw)
    for key in raw:
        if key not in TOP_KEYS:
            raise InvalidConfig(f"{key}: unknown key (allowed: {', '.join(sorted(TOP_KEYS))})")
    for key in ("dataset", "methods"):
        if key not in raw:
            raise InvalidConfig(f"{key}: required key missing")
    dataset = _dataset(raw["dataset"], Path(base_dir))
    methods = _names("methods", raw["methods"], METHODS)
    classifiers = _names("classifiers", raw.get("classifiers", ["knn"]), CLASSIFIER_KINDS)
    env = _section("env", raw.get("env", {}), ENV_KEYS, EnvConfig, rename={"lambda": "lam"})
    agent = _section("agent", raw.get("agent", {}), AGENT_KEYS, AgentConfig)
    clf = _section("classifier", raw.get("classifier", {}), CLASSIFIER_KEYS, ClassifierSpec)
    split = _section("split", raw.get("split", {}), SPLIT_KEYS, SplitSpec)
    train = _section("train", raw.get("train", {}), TRAIN_KEYS, TrainConfig,
                     env=env, agent=agent, classifier=clf, split=split)
    grid = _check("grid_size", raw.get("grid_size", 200), INT)
    if grid < 2:
        raise InvalidConfig("grid_size: must be >= 2")
    trace = _check("trace", raw.get("trace", False), BOOL)
    out = _check("out", raw.get("out", "results"), STR)
    return ExperimentConfig(dataset, methods, train, classifiers, grid, trace, out, raw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config: not valid JSON ({exc})") from None
    return parse_config(raw, path.parent)
