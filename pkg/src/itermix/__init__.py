"""Iterative mix-up oversampling for imbalanced binary classification.

A deterministic actor-critic learns where and how to mix opposite-label
sample pairs so that a downstream classifier's validation macro-F1 improves,
alongside classical oversamplers and a seeded benchmark harness.
"""

from .baselines import BASELINES, OversampleRequest, oversample
from .classifiers import ClassifierSpec, fit
from .data import Dataset, LabeledSample, SplitSpec, load_csv, make_toy, save_csv, split
from .env import Action, EnvConfig, MixupEnv
from .agent import AgentConfig, DDPGAgent
from .metrics import MacroScores, macro_scores
from .mixup import MixConfig, mix_features, mix_label
from .trainer import METHODS, TrainConfig, run_experiment, train_policy, final_rollout

__version__ = "0.1.0"

__all__ = [
    "BASELINES", "METHODS", "Action", "AgentConfig", "ClassifierSpec", "DDPGAgent", "Dataset",
    "EnvConfig", "LabeledSample", "MacroScores", "MixConfig", "MixupEnv", "OversampleRequest",
    "SplitSpec", "TrainConfig", "final_rollout", "fit", "load_csv", "macro_scores", "make_toy",
    "mix_features", "mix_label", "oversample", "run_experiment", "save_csv", "split",
    "train_policy",
]
