"""Deterministic actor-critic over the (k, alpha, n, epsilon) action space.

The actor maps a state vector (the two source samples concatenated) to a raw
4-vector.  The environment receives ``w * sigmoid(raw)`` with ``k`` and ``n``
rounded half away from zero and clamped to ``[1, w]``.  The critic scores
``(state, raw action)`` pairs, so the policy gradient never passes through
the rounding.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._util import atomic_write_bytes, round_half_away
from .env import Action, EnvConfig
from .errors import BufferTooSmall, DimensionMismatch, EmptyBatch, InvalidConfig, VersionMismatch
from .nn import Adam, DenseNet, sigmoid, soft_update

ACTION_DIM = 4
# last-layer init bound, keeps initial raw actions and Q values near zero
OUT_INIT = 3e-3


@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.99
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    batch_size: int = 64
    noise_sigma: float = 0.1
    noise_sigma_final: float = 0.01
    tau: float = 0.005
    use_targets: bool = True
    updates_per_step: int = 1
    hidden: tuple[int, ...] = (64, 64)
    raw_bound: float | None = None
    buffer_capacity: int = 10_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidConfig("gamma must lie in [0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise InvalidConfig("tau must lie in (0, 1]")
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise InvalidConfig("learning rates must be positive")
        if self.batch_size < 1 or self.updates_per_step < 1 or self.buffer_capacity < 1:
            raise InvalidConfig("batch_size, updates_per_step and buffer_capacity must be >= 1")
        if self.noise_sigma < 0 or self.noise_sigma_final < 0:
            raise InvalidConfig("noise levels must be non-negative")
        if not self.hidden or min(self.hidden) < 1:
            raise InvalidConfig("hidden widths must be >= 1")
        if self.raw_bound is not None and not self.raw_bound > 0:
            raise InvalidConfig("raw_bound must be positive or null")


@dataclass(frozen=True)
class ActionBounds:
    w: tuple[float, float, float, float] = (10.0, 1.0, 5.0, 1.0)

    def __post_init__(self):
        w = tuple(float(v) for v in self.w)
        if len(w) != ACTION_DIM or min(w) <= 0:
            raise InvalidConfig("w must be four positive numbers")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_env(cls, cfg: EnvConfig) -> "ActionBounds":
        return cls((cfg.K, 1.0, cfg.N_max, 1.0))


def to_env_action(raw, bounds: ActionBounds = ActionBounds()) -> Action:
    """Squash a raw actor output into a legal :class:`Action`."""
    raw = np.asarray(raw, dtype=np.float64).reshape(-1)
    if raw.shape[0] != ACTION_DIM:
        raise DimensionMismatch(f"raw action must have {ACTION_DIM} entries")
    v = np.asarray(bounds.w) * sigmoid(raw)
    k_max = max(1, int(bounds.w[0]))
    n_max = max(1, int(bounds.w[2]))
    k = min(max(round_half_away(v[0]), 1), k_max)
    n = min(max(round_half_away(v[2]), 1), n_max)
    alpha = float(min(max(v[1], 0.0), 1.0))
    eps = float(min(max(v[3], 0.0), 1.0))
    return Action(k=k, alpha=alpha, n=n, epsilon=eps)


@dataclass(frozen=True, eq=False)
class TransitionRecord:
    s: np.ndarray
    a_raw: np.ndarray
    r: float
    s_next: np.ndarray
    terminal: bool

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64).reshape(-1)
        s_next = np.asarray(self.s_next, dtype=np.float64).reshape(-1)
        a = np.asarray(self.a_raw, dtype=np.float64).reshape(-1)
        if s.shape != s_next.shape or a.shape[0] != ACTION_DIM:
            raise DimensionMismatch("inconsistent transition dimensions")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "s_next", s_next)
        object.__setattr__(self, "a_raw", a)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "terminal", bool(self.terminal))


class ReplayBuffer:
    """Bounded FIFO of transitions, sampled uniformly without replacement."""

    def __init__(self, capacity: int = 10_000, seed: int = 0):
        if capacity < 1:
            raise InvalidConfig("capacity must be >= 1")
        self.capacity = capacity
        self.records: deque[TransitionRecord] = deque(maxlen=capacity)
        self.rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return len(self.records)

    def push(self, record: TransitionRecord) -> None:
        self.records.append(record)

    def sample(self, batch_size: int, rng: np.random.Generator | None = None) -> list[TransitionRecord]:
        if batch_size > len(self.records):
            raise BufferTooSmall(f"requested {batch_size} records, buffer holds {len(self.records)}")
        rng = self.rng if rng is None else rng
        slots = rng.choice(len(self.records), size=batch_size, replace=False)
        return [self.records[i] for i in slots]


def _stack(records: Sequence[TransitionRecord]):
    S = np.stack([r.s for r in records])
    A = np.stack([r.a_raw for r in records])
    R = np.array([r.r for r in records])
    S2 = np.stack([r.s_next for r in records])
    T = np.array([r.terminal for r in records], dtype=bool)
    return S, A, R, S2, T


class Actor:
    """Policy network ``state -> raw action`` with its optimizer.

    With ``raw_bound`` set the network output passes through
    ``raw_bound * tanh(.)``, which keeps raw actions where the critic has
    seen data instead of letting them drift to where it merely extrapolates.
    """

    def __init__(self, state_dim: int, hidden=(64, 64), lr: float = 1e-4,
                 rng: np.random.Generator | None = None, raw_bound: float | None = None):
        self.net = DenseNet([state_dim, *hidden, ACTION_DIM], rng=rng, out_scale=OUT_INIT)
        self.opt = Adam(self.net.params, lr=lr)
        self.raw_bound = raw_bound

    @property
    def state_dim(self) -> int:
        return self.net.in_dim

    def forward(self, S, return_cache: bool = False):
        z, cache = self.net.forward(S, return_cache=True)
        raw = z if self.raw_bound is None else self.raw_bound * np.tanh(z / self.raw_bound)
        return (raw, (cache, z)) if return_cache else raw

    def __call__(self, S) -> np.ndarray:
        return self.forward(S)

    def backward(self, cache, draw):
        net_cache, z = cache
        if self.raw_bound is not None:
            t = np.tanh(z / self.raw_bound)
            draw = draw * (1.0 - t * t)
        return self.net.backward(net_cache, draw)

    def copy(self) -> "Actor":
        a = Actor.__new__(Actor)
        a.net = self.net.copy()
        a.opt = self.opt.copy()
        a.raw_bound = self.raw_bound
        return a


class Critic:
    """Value network ``(state, raw action) -> Q`` with its optimizer."""

    def __init__(self, state_dim: int, hidden=(64, 64), lr: float = 1e-3,
                 rng: np.random.Generator | None = None):
        self.net = DenseNet([state_dim + ACTION_DIM, *hidden, 1], rng=rng, out_scale=OUT_INIT)
        self.opt = Adam(self.net.params, lr=lr)

    @property
    def state_dim(self) -> int:
        return self.net.in_dim - ACTION_DIM

    def __call__(self, S, A) -> np.ndarray:
        S = np.atleast_2d(np.asarray(S, dtype=np.float64))
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        return self.net.forward(np.hstack([S, A]))[:, 0]

    def copy(self) -> "Critic":
        c = Critic.__new__(Critic)
        c.net = self.net.copy()
        c.opt = self.opt.copy()
        return c


def act(actor: Actor, state_vector, noise_sigma: float = 0.0,
        rng: np.random.Generator | None = None) -> np.ndarray:
    """Raw action for one state, plus i.i.d. Gaussian noise when ``noise_sigma > 0``."""
    s = np.asarray(state_vector, dtype=np.float64).reshape(-1)
    if s.shape[0] != actor.state_dim:
        raise DimensionMismatch(f"state has dimension {s.shape[0]}, actor expects {actor.state_dim}")
    raw = actor(s)[0]
    if noise_sigma > 0:
        if rng is None:
            raise ValueError("rng is required for noisy actions")
        raw = raw + rng.normal(0.0, noise_sigma, size=ACTION_DIM)
    return raw


def critic_targets(records: Sequence[TransitionRecord], actor: Actor, critic: Critic,
                   gamma: float) -> np.ndarray:
    """Bellman targets ``r + gamma * Q(s', pi(s'))``, just ``r`` for terminal records."""
    S, A, R, S2, T = _stack(records)
    q_next = critic(S2, actor(S2))
    return R + np.where(T, 0.0, gamma * q_next)


def critic_target(record: TransitionRecord, actor: Actor, critic: Critic, gamma: float) -> float:
    if record.terminal:
        return record.r
    return float(critic_targets([record], actor, critic, gamma)[0])


def critic_loss_grads(critic: Critic, S, A, targets):
    """Mean squared Bellman error and its gradient w.r.t. the critic parameters."""
    X = np.hstack([np.atleast_2d(S), np.atleast_2d(A)])
    q, cache = critic.net.forward(X, return_cache=True)
    diff = q[:, 0] - np.asarray(targets, dtype=np.float64)
    loss = float(np.mean(diff * diff))
    grads, _ = critic.net.backward(cache, (2.0 * diff / diff.shape[0])[:, None])
    return loss, grads


def actor_loss_grads(actor: Actor, critic: Critic, S):
    """``-mean Q(s, pi(s))`` and its gradient w.r.t. the actor, critic held fixed."""
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    raw, a_cache = actor.forward(S, return_cache=True)
    q, c_cache = critic.net.forward(np.hstack([S, raw]), return_cache=True)
    loss = -float(np.mean(q))
    _, dx = critic.net.backward(c_cache, np.full((S.shape[0], 1), -1.0 / S.shape[0]))
    grads, _ = actor.backward(a_cache, dx[:, S.shape[1]:])
    return loss, grads


def update_critic(critic: Critic, records: Sequence[TransitionRecord], targets) -> float:
    """One optimizer step on the Bellman error; returns the loss before the step."""
    if len(records) == 0:
        raise EmptyBatch("empty batch")
    S, A, _, _, _ = _stack(records)
    loss, grads = critic_loss_grads(critic, S, A, targets)
    critic.opt.step(critic.net.params, grads)
    return loss


def update_actor(actor: Actor, critic: Critic, states) -> float:
    """One optimizer step on ``-mean Q(s, pi(s))``; returns the loss before the step."""
    S = np.asarray(states, dtype=np.float64)
    if S.size == 0:
        raise EmptyBatch("empty batch")
    loss, grads = actor_loss_grads(actor, critic, S)
    actor.opt.step(actor.net.params, grads)
    return loss


class DDPGAgent:
    """Actor, critic, their target copies and the replay buffer."""

    def __init__(self, state_dim: int, cfg: AgentConfig = AgentConfig()):
        self.cfg = cfg
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5eed]))
        self.actor = Actor(state_dim, cfg.hidden, cfg.actor_lr, rng, cfg.raw_bound)
        self.critic = Critic(state_dim, cfg.hidden, cfg.critic_lr, rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.buffer = ReplayBuffer(cfg.buffer_capacity, seed=cfg.seed + 1)
        self.noise_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xA11CE]))
        self.n_updates = 0

    @property
    def state_dim(self) -> int:
        return self.actor.state_dim

    def act(self, state_vector, noise_sigma: float = 0.0) -> np.ndarray:
        return act(self.actor, state_vector, noise_sigma, self.noise_rng)

    def ready(self) -> bool:
        return len(self.buffer) >= self.cfg.batch_size

    def train_step(self) -> tuple[float, float]:
        """Sample a batch and update critic then actor; returns (critic loss, actor loss)."""
        batch = self.buffer.sample(self.cfg.batch_size)
        if self.cfg.use_targets:
            b = critic_targets(batch, self.actor_target, self.critic_target, self.cfg.gamma)
        else:
            b = critic_targets(batch, self.actor, self.critic, self.cfg.gamma)
        c_loss = update_critic(self.critic, batch, b)
        a_loss = update_actor(self.actor, self.critic, np.stack([r.s for r in batch]))
        if self.cfg.use_targets:
            soft_update(self.actor_target.net, self.actor.net, self.cfg.tau)
            soft_update(self.critic_target.net, self.critic.net, self.cfg.tau)
        self.n_updates += 1
        return c_loss, a_loss

    def save(self, path) -> None:
        atomic_write_bytes(path, dump_params(self.actor, self.critic))

    def load(self, path) -> None:
        actor_params, critic_params = load_params(Path(path).read_bytes())
        for dst, src in ((self.actor.net.params, actor_params), (self.critic.net.params, critic_params)):
            if len(dst) != len(src) or any(a.shape != b.shape for a, b in zip(dst, src)):
                raise DimensionMismatch("stored parameters do not match this agent's shape")
            for a, b in zip(dst, src):
                a[...] = b
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()


# ---------------------------------------------------------------------------
# parameter file: b"IMXP", u32 version, u32 n_actor, u32 n_critic, then per
# array u32 ndim, u32 dims..., float64 data; everything little-endian
# ---------------------------------------------------------------------------

PARAM_MAGIC = b"IMXP"
PARAM_VERSION = 1


def dump_params(actor: Actor, critic: Critic) -> bytes:
    arrays = [*actor.net.params, *critic.net.params]
    out = [PARAM_MAGIC, struct.pack("<III", PARAM_VERSION, len(actor.net.params), len(critic.net.params))]
    for a in arrays:
        out.append(struct.pack("<I", a.ndim))
        out.append(struct.pack(f"<{a.ndim}I", *a.shape))
        out.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return b"".join(out)


def load_params(blob: bytes) -> tuple[list[np.ndarray], list[np.ndarray]]:
    if blob[:4] != PARAM_MAGIC:
        raise VersionMismatch("not an actor/critic parameter file")
    version, n_actor, n_critic = struct.unpack_from("<III", blob, 4)
    if version != PARAM_VERSION:
        raise VersionMismatch(f"parameter file version {version}, expected {PARAM_VERSION}")
    pos = 16
    arrays = []
    for _ in range(n_actor + n_critic):
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}I", blob, pos)
        pos += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).reshape(shape)
        arrays.append(arr.astype(np.float64))
        pos += 8 * count
    if pos != len(blob):
        raise VersionMismatch("trailing bytes in parameter file")
    return arrays[:n_actor], arrays[n_actor:]
