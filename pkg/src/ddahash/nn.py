"""A small dense feed-forward network engine with mini-batch backprop.

Only the pieces the hashing pipeline needs: sigmoid and softmax dense
layers, inverted dropout, binary cross-entropy, RMSProp and Adam.
Everything runs in float64.  Inputs are row-major batches of shape
``(batch, fan_in)``; a dense layer stores its weights as
``(fan_out, fan_in)`` and computes ``act(x @ W.T + b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import InvalidArgumentError

BCE_EPS = 1e-7

ACTIVATIONS = ("sigmoid", "softmax")


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; the same seed gives the same stream everywhere."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def glorot_init(fan_in: int, fan_out: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Uniform Glorot weights ``(fan_out, fan_in)`` and a zero bias."""
    if fan_in < 1 or fan_out < 1:
        raise InvalidArgumentError(f"layer dimensions must be >= 1, got ({fan_in}, {fan_out})")
    bound = glorot_bound(fan_in, fan_out)
    w = make_rng(rng).uniform(-bound, bound, size=(fan_out, fan_in))
    return w, np.zeros(fan_out)


def sigmoid(z):
    return expit(z)


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class Dense:
    """Fully connected layer followed by a sigmoid or a row-wise softmax."""

    kind = "dense"

    def __init__(self, weights, bias=None, activation="sigmoid"):
        if activation not in ACTIVATIONS:
            raise InvalidArgumentError(f"unknown activation {activation!r}")
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 2 or min(weights.shape) < 1:
            raise InvalidArgumentError(f"weights must be a non-empty matrix, got shape {weights.shape}")
        if bias is None:
            bias = np.zeros(weights.shape[0])
        bias = np.array(bias, dtype=np.float64)
        if bias.shape != (weights.shape[0],):
            raise InvalidArgumentError(
                f"bias shape {bias.shape} does not match fan_out {weights.shape[0]}"
            )
        self.weights = weights
        self.bias = bias
        self.activation = activation

    @classmethod
    def glorot(cls, fan_in, fan_out, rng, activation="sigmoid"):
        w, b = glorot_init(fan_in, fan_out, rng)
        return cls(w, b, activation)

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]

    def forward(self, x):
        z = x @ self.weights.T
        z += self.bias
        return sigmoid(z) if self.activation == "sigmoid" else softmax(z)

    def copy(self):
        return Dense(self.weights.copy(), self.bias.copy(), self.activation)

    def __repr__(self):
        name = "Sig" if self.activation == "sigmoid" else "Softmax"
        return f"{name}({self.fan_in}->{self.fan_out})"


class Dropout:
    """Inverted dropout: survivors are scaled by ``1 / (1 - p)`` in training."""

    kind = "dropout"

    def __init__(self, p=0.2):
        if not 0.0 <= p < 1.0:
            raise InvalidArgumentError(f"dropout probability must be in [0, 1), got {p}")
        self.p = float(p)

    def mask(self, shape, rng):
        keep = rng.random(shape) >= self.p
        return keep * (1.0 / (1.0 - self.p))

    def copy(self):
        return Dropout(self.p)

    def __repr__(self):
        return f"Dropout({self.p:g})"


class Network:
    """An ordered stack of :class:`Dense` and :class:`Dropout` layers."""

    def __init__(self, layers):
        self.layers = list(layers)
        dims = None
        for layer in self.dense_layers:
            if dims is not None and layer.fan_in != dims:
                raise InvalidArgumentError(
                    f"layer {layer!r} expects {layer.fan_in} inputs but the previous layer has {dims} outputs"
                )
            dims = layer.fan_out
        if dims is None:
            raise InvalidArgumentError("a network needs at least one dense layer")
        if isinstance(self.layers[-1], Dropout):
            raise InvalidArgumentError("a network cannot end in a dropout layer")

    @property
    def dense_layers(self) -> list[Dense]:
        return [layer for layer in self.layers if isinstance(layer, Dense)]

    @property
    def geometry(self) -> list[tuple[int, int]]:
        return [(d.fan_in, d.fan_out) for d in self.dense_layers]

    @property
    def n_inputs(self) -> int:
        return self.dense_layers[0].fan_in

    @property
    def n_outputs(self) -> int:
        return self.dense_layers[-1].fan_out

    def params(self) -> list[np.ndarray]:
        out = []
        for d in self.dense_layers:
            out += [d.weights, d.bias]
        return out

    def copy(self) -> "Network":
        return Network([layer.copy() for layer in self.layers])

    def predict(self, x) -> np.ndarray:
        """Test-mode forward pass (dropout is the identity)."""
        return forward(self, x)[0]

    def __repr__(self):
        return "Network([" + ", ".join(map(repr, self.layers)) + "])"


@dataclass
class ForwardCache:
    """Activations recorded by :func:`forward`; ``acts[0]`` is the input."""

    acts: list = field(default_factory=list)
    masks: dict = field(default_factory=dict)


def _as_batch(network, batch):
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != network.n_inputs:
        raise InvalidArgumentError(
            f"batch of shape {x.shape} does not match network input width {network.n_inputs}"
        )
    return x


def forward(network: Network, batch, train: bool = False, rng=None):
    """Run ``batch`` through ``network``; returns ``(output, cache)``.

    In test mode (``train=False``) dropout layers pass inputs through
    unchanged and ``rng`` is not used.
    """
    x = _as_batch(network, batch)
    cache = ForwardCache(acts=[x])
    if train:
        rng = make_rng(0 if rng is None else rng)
    for i, layer in enumerate(network.layers):
        if isinstance(layer, Dropout):
            if train and layer.p > 0.0:
                m = layer.mask(x.shape, rng)
                cache.masks[i] = m
                x = x * m
        else:
            x = layer.forward(x)
        cache.acts.append(x)
    return x, cache


def bce_loss(prediction, target) -> float:
    """Mean over samples of the summed per-unit binary cross-entropy."""
    p = np.asarray(prediction, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise InvalidArgumentError(f"prediction shape {p.shape} != target shape {t.shape}")
    if p.ndim == 1:
        p, t = p[None, :], t[None, :]
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    per_sample = -(t * np.log(p) + (1.0 - t) * np.log1p(-p)).sum(axis=1)
    return float(per_sample.mean())


def _output_delta(layer: Dense, out, target):
    """dL/dz for the last layer under mean-over-batch BCE."""
    batch = out.shape[0]
    if layer.activation == "sigmoid":
        # fused sigmoid + BCE gradient; equals the clipped one away from the clip range
        return (out - target) / batch
    p = np.clip(out, BCE_EPS, 1.0 - BCE_EPS)
    live = (out > BCE_EPS) & (out < 1.0 - BCE_EPS)
    g = (-target / p + (1.0 - target) / (1.0 - p)) * live / batch
    return out * (g - (g * out).sum(axis=1, keepdims=True))


def backward(network: Network, cache: ForwardCache, target) -> list[np.ndarray]:
    """Gradients of :func:`bce_loss` w.r.t. ``network.params()``, same order."""
    if len(cache.acts) != len(network.layers) + 1:
        raise InvalidArgumentError("cache was not produced by this network")
    out = cache.acts[-1]
    t = np.asarray(target, dtype=np.float64)
    if t.ndim == 1:
        t = t[None, :]
    if t.shape != out.shape:
        raise InvalidArgumentError(f"target shape {t.shape} != output shape {out.shape}")

    grads = []
    delta = None  # dL/d(output of the current layer)
    seen_last = False
    for i in range(len(network.layers) - 1, -1, -1):
        layer = network.layers[i]
        x_in, x_out = cache.acts[i], cache.acts[i + 1]
        if isinstance(layer, Dropout):
            if delta is not None and i in cache.masks:
                delta = delta * cache.masks[i]
            continue
        if not seen_last:
            dz = _output_delta(layer, x_out, t)
            seen_last = True
        elif layer.activation == "sigmoid":
            dz = delta * x_out * (1.0 - x_out)
        else:
            dz = x_out * (delta - (delta * x_out).sum(axis=1, keepdims=True))
        grads.append(dz.sum(axis=0))
        grads.append(dz.T @ x_in)
        delta = dz @ layer.weights
    grads.reverse()
    return grads


class Optimizer:
    """Base class: keeps one accumulator set per parameter array."""

    kind = "?"

    def __init__(self, lr=0.001, eps=1e-8):
        self.lr = lr
        self.eps = eps
        self.t = 0
        self._shapes = None

    def _check(self, params, grads):
        if len(params) != len(grads):
            raise InvalidArgumentError("params and grads differ in length")
        shapes = [p.shape for p in params]
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise InvalidArgumentError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if self._shapes is None:
            self._shapes = shapes
            self._init_state(params)
        elif shapes != self._shapes:
            raise InvalidArgumentError("optimizer state was initialised for different parameter shapes")

    def _init_state(self, params):
        raise NotImplementedError

    def step(self, params, grads):
        """Update ``params`` in place."""
        raise NotImplementedError


class RMSProp(Optimizer):
    kind = "rmsprop"

    def __init__(self, lr=0.001, rho=0.9, eps=1e-8):
        super().__init__(lr, eps)
        self.rho = rho
        self.acc = None

    def _init_state(self, params):
        self.acc = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        self._check(params, grads)
        self.t += 1
        for p, g, a in zip(params, grads, self.acc):
            a *= self.rho
            a += (1.0 - self.rho) * g * g
            p -= self.lr * g / np.sqrt(a + self.eps)


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(lr, eps)
        self.beta1 = beta1
        self.beta2 = beta2
        self.m = None
        self.v = None

    def _init_state(self, params):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        self._check(params, grads)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(kind: str, **kwargs) -> Optimizer:
    kinds = {"rmsprop": RMSProp, "adam": Adam}
    try:
        return kinds[kind.lower()](**kwargs)
    except KeyError:
        raise InvalidArgumentError(f"unknown optimizer {kind!r}; choose from {sorted(kinds)}") from None


def train_epochs(
    network: Network,
    data,
    epochs: int = 100,
    batch_size: int = 16,
    optimizer: Optimizer | str = "rmsprop",
    rng=0,
    target=None,
    on_epoch=None,
) -> list[float]:
    """Mini-batch backprop for ``epochs`` passes over ``data``.

    The sample order is reshuffled every epoch with ``rng``; a trailing
    partial batch is trained as well.  ``target`` defaults to ``data``
    (autoencoder training).  Returns the per-epoch mean training loss.
    ``on_epoch(epoch, loss)`` is called after each epoch if given.
    """
    x = _as_batch(network, data)
    n = x.shape[0]
    if n == 0:
        raise InvalidArgumentError("training data is empty")
    if batch_size < 1:
        raise InvalidArgumentError("batch_size must be >= 1")
    if epochs < 0:
        raise InvalidArgumentError("epochs must be >= 0")
    y = x if target is None else np.asarray(target, dtype=np.float64)
    if y.shape[0] != n:
        raise InvalidArgumentError("target and data differ in sample count")
    if isinstance(optimizer, str):
        optimizer = make_optimizer(optimizer)
    rng = make_rng(rng)
    params = network.params()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb, yb = x[idx], y[idx]
            out, cache = forward(network, xb, train=True, rng=rng)
            total += bce_loss(out, yb) * len(idx)
            optimizer.step(params, backward(network, cache, yb))
        history.append(total / n)
        if on_epoch is not None:
            on_epoch(epoch, history[-1])
    return history
