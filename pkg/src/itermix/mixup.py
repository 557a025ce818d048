"""Convex mix-up of two source samples with a thresholded hard label."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import LabeledSample
from .errors import AlphaOutOfRange, DimensionMismatch, InvalidConfig


@dataclass(frozen=True)
class MixConfig:
    """Label threshold ``eta``: the synthetic sample keeps ``x0``'s label when alpha >= eta.

    Values below 0.5 are legal (0.3 is the default) but bias labels toward
    ``x0``; a warning is issued for them.
    """

    eta: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidConfig(f"eta must lie in [0, 1], got {self.eta}")


def check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise InvalidConfig(f"eta must lie in [0, 1], got {eta}")
    if eta < 0.5:
        warnings.warn(f"eta={eta} is below 0.5; synthetic labels favor x0 even when "
                      "the point lies closer to x1", stacklevel=2)


@dataclass(frozen=True)
class SourcePair:
    x0: LabeledSample
    x1: LabeledSample

    def __post_init__(self):
        if self.x0.features.shape != self.x1.features.shape:
            raise DimensionMismatch("source samples differ in dimension")
        if self.x0.label == self.x1.label:
            raise ValueError("source samples must carry different labels")


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")


def mix_features(x0, x1, alpha: float) -> np.ndarray:
    """``alpha * x0 + (1 - alpha) * x1``; exact at alpha 0 and 1."""
    a = np.asarray(x0, dtype=np.float64)
    b = np.asarray(x1, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    _check_alpha(alpha)
    if alpha == 1.0:
        return a.copy()
    if alpha == 0.0:
        return b.copy()
    out = alpha * a + (1.0 - alpha) * b
    # rounding can push a coordinate one ulp past the segment end
    return np.clip(out, np.minimum(a, b), np.maximum(a, b))


def mix_label(y0: int, y1: int, alpha: float, eta: float) -> int:
    _check_alpha(alpha)
    if not 0.0 <= eta <= 1.0:
        raise InvalidConfig(f"eta must lie in [0, 1], got {eta}")
    return int(y0) if alpha >= eta else int(y1)


def synthesize(pair: SourcePair, alpha: float, n: int, cfg: MixConfig = MixConfig()) -> list[LabeledSample]:
    """``n`` identical synthetic samples mixed from ``pair``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = mix_features(pair.x0.features, pair.x1.features, alpha)
    y = mix_label(pair.x0.label, pair.x1.label, alpha, cfg.eta)
    sample = LabeledSample(x, y)
    return [sample] * int(n)
