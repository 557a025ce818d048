"""Minimal fully-connected ReLU networks with hand-written backprop and Adam.

All arithmetic is float64.  A network is a list of ``(W, b)`` layers with ReLU
between them and a linear last layer; heads (sigmoid, losses) live with the
callers.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ShapeMismatch


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softplus(z):
    z = np.asarray(z, dtype=np.float64)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


class DenseNet:
    """ReLU multilayer perceptron ``sizes[0] -> ... -> sizes[-1]``.

    Weights and biases start uniform in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]``.
    ``out_scale`` overrides that bound for the last layer (small values keep
    initial outputs near zero).
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, out_scale: float | None = None):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"invalid layer sizes {sizes}")
        self.sizes = sizes
        rng = np.random.default_rng(0) if rng is None else rng
        self.params: list[np.ndarray] = []
        n_layers = len(sizes) - 1
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            if out_scale is not None and i == n_layers - 1:
                bound = out_scale
            self.params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.params.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def copy(self) -> "DenseNet":
        net = DenseNet.__new__(DenseNet)
        net.sizes = list(self.sizes)
        net.params = [p.copy() for p in self.params]
        return net

    def zero_(self) -> "DenseNet":
        for p in self.params:
            p[...] = 0.0
        return self

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[-1] != self.in_dim:
            raise DimensionMismatch(f"input dimension {X.shape[-1]}, network expects {self.in_dim}")
        return X

    def forward(self, X, return_cache: bool = False):
        h = self._check(X)
        cache = [h]
        n_layers = len(self.params) // 2
        for i in range(n_layers):
            W, b = self.params[2 * i], self.params[2 * i + 1]
            z = h @ W + b
            if i < n_layers - 1:
                h = np.maximum(z, 0.0)
            else:
                h = z
            cache.append(h)
        return (h, cache) if return_cache else h

    __call__ = forward

    def backward(self, cache, dout):
        """Gradients w.r.t. parameters and input, given dL/d(output)."""
        g = np.asarray(dout, dtype=np.float64)
        n_layers = len(self.params) // 2
        grads: list[np.ndarray] = [None] * len(self.params)  # type: ignore[list-item]
        for i in reversed(range(n_layers)):
            W = self.params[2 * i]
            h_in = cache[i]
            if i < n_layers - 1:
                g = g * (cache[i + 1] > 0.0)
            grads[2 * i] = h_in.T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ W.T
        return grads, g


class Adam:
    """Adaptive-moment optimizer holding its own moment buffers and step count."""

    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def copy(self) -> "Adam":
        opt = Adam.__new__(Adam)
        opt.lr, opt.beta1, opt.beta2, opt.eps = self.lr, self.beta1, self.beta2, self.eps
        opt.m = [a.copy() for a in self.m]
        opt.v = [a.copy() for a in self.v]
        opt.t = self.t
        return opt


def soft_update(target: DenseNet, online: DenseNet, tau: float) -> None:
    """``target <- (1 - tau) * target + tau * online`` in place."""
    if len(target.params) != len(online.params) or any(
            a.shape != b.shape for a, b in zip(target.params, online.params)):
        raise ShapeMismatch("target and online networks differ in shape")
    for t, o in zip(target.params, online.params):
        t *= 1.0 - tau
        t += tau * o
