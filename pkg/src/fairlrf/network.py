"""Small feed-forward classifier with dense and SVD-factored layers.

Batches are row-major: ``x`` has shape (batch, d_in) and a layer computes
``x @ W + b``. Class targets passed to :func:`loss`, :func:`gradient` and
:func:`train` are 0-based indices; :func:`predict` also returns 0-based
indices.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptyBatch, EmptyDataset, ShapeError
from .rng import Rng

ACTIVATIONS = ("relu", "none")


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    @property
    def d_out(self) -> int:
        return self.weights.shape[1]

    def effective_weights(self) -> np.ndarray:
        return self.weights

    def param_names(self) -> tuple[str, ...]:
        return ("weights", "bias")


@dataclass
class FactoredLayer:
    """``x @ (u_hat*u_mask) @ diag(s_hat) @ (v_hat*v_mask) + bias``.

    ``v_hat`` is stored k x d_out (already transposed relative to the SVD
    factor ``v``).
    """

    u_hat: np.ndarray
    s_hat: np.ndarray
    v_hat: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    u_mask: np.ndarray = None
    v_mask: np.ndarray = None

    def __post_init__(self):
        if self.u_mask is None:
            self.u_mask = np.ones(self.u_hat.shape, dtype=bool)
        if self.v_mask is None:
            self.v_mask = np.ones(self.v_hat.shape, dtype=bool)

    @property
    def d_in(self) -> int:
        return self.u_hat.shape[0]

    @property
    def d_out(self) -> int:
        return self.v_hat.shape[1]

    @property
    def k(self) -> int:
        return len(self.s_hat)

    @property
    def zeroed_count(self) -> int:
        return int(np.count_nonzero(~self.u_mask) + np.count_nonzero(~self.v_mask))

    def effective_weights(self) -> np.ndarray:
        return ((self.u_hat * self.u_mask) * self.s_hat) @ (self.v_hat * self.v_mask)

    def param_names(self) -> tuple[str, ...]:
        return ("u_hat", "s_hat", "v_hat", "bias")


Layer = Union[DenseLayer, FactoredLayer]


@dataclass
class Network:
    layers: list
    class_count: int

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("network needs at least one layer")
        for a, b in zip(self.layers[:-1], self.layers[1:]):
            if a.d_out != b.d_in:
                raise ShapeError(f"layer widths do not chain: {a.d_out} -> {b.d_in}")
        if self.layers[-1].d_out != self.class_count:
            raise ShapeError("last layer width must equal the class count")
        if self.layers[-1].activation != "none":
            raise ShapeError("final layer must output raw logits (activation 'none')")

    @property
    def d_in(self) -> int:
        return self.layers[0].d_in

    def copy(self) -> "Network":
        return copy.deepcopy(self)


@dataclass
class TrainConfig:
    """Mini-batch SGD with step learning-rate decay."""

    epochs: int = 100
    learning_rate: float = 0.01
    lr_decay_every: int = 10
    lr_decay_gamma: float = 0.57
    batch_size: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0 or self.lr_decay_every <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, lr_decay_every and batch_size must be positive")
        if not 0 < self.lr_decay_gamma <= 1:
            raise ValueError("lr_decay_gamma must lie in (0, 1]")


def init_network(sizes: list[int], seed: int) -> Network:
    """Glorot-uniform dense network; ReLU on hidden layers, zero biases."""
    rng = Rng(seed)
    layers = []
    for i, (d_in, d_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        limit = math.sqrt(6.0 / (d_in + d_out))
        w = rng.uniform_array(-limit, limit, (d_in, d_out))
        act = "none" if i == len(sizes) - 2 else "relu"
        layers.append(DenseLayer(w, np.zeros(d_out), act))
    return Network(layers, sizes[-1])


def _as_batch(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.d_in:
        raise ShapeError(f"input width {x.shape[-1]} does not match network input {net.d_in}")
    return x


def _forward_trace(net: Network, x: np.ndarray):
    """Returns (inputs to each layer, pre-activations of each layer)."""
    inputs, pre = [], []
    h = x
    for layer in net.layers:
        inputs.append(h)
        if isinstance(layer, FactoredLayer):
            z = ((h @ (layer.u_hat * layer.u_mask)) * layer.s_hat) @ (layer.v_hat * layer.v_mask)
        else:
            z = h @ layer.weights
        z = z + layer.bias
        pre.append(z)
        h = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return inputs, pre


def forward(net: Network, x) -> np.ndarray:
    """Logits for a batch (a single vector is treated as a batch of one)."""
    x = _as_batch(net, x)
    _, pre = _forward_trace(net, x)
    return pre[-1]


def layer_activations(net: Network, x, layer_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Input to and pre-activation output of one layer over a batch."""
    inputs, pre = _forward_trace(net, _as_batch(net, x))
    return inputs[layer_index], pre[layer_index]


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_targets(net: Network, x: np.ndarray, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if len(y) != len(x):
        raise ShapeError("targets and inputs differ in length")
    if len(y) == 0:
        raise EmptyBatch("empty batch")
    return y


def loss(net: Network, x, y) -> float:
    """Mean softmax cross-entropy; ``y`` holds 0-based class indices."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and len(x) == 0:
        raise EmptyBatch("empty batch")
    x = _as_batch(net, x)
    y = _check_targets(net, x, y)
    logits = forward(net, x)
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    return float(np.mean(lse - logits[np.arange(len(y)), y]))


def gradient(net: Network, x, y) -> list[dict[str, np.ndarray]]:
    """Backprop gradients of the mean loss, one dict per layer.

    Dense layers yield ``weights``/``bias``; factored layers yield
    ``u_hat``/``s_hat``/``v_hat``/``bias``. Factor gradients are derivatives
    with respect to the stored factor entry, so masked entries get zero.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and len(x) == 0:
        raise EmptyBatch("empty batch")
    x = _as_batch(net, x)
    y = _check_targets(net, x, y)
    inputs, pre = _forward_trace(net, x)
    n = len(y)
    delta = softmax(pre[-1])
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads: list[dict] = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if layer.activation == "relu":
            delta = delta * (pre[i] > 0)
        h = inputs[i]
        g = {"bias": delta.sum(axis=0)}
        if isinstance(layer, FactoredLayer):
            u = layer.u_hat * layer.u_mask
            v = layer.v_hat * layer.v_mask
            a = h @ u  # (n, k)
            dz_v = delta @ v.T  # gradient w.r.t. (a * s)
            g["v_hat"] = ((a * layer.s_hat).T @ delta) * layer.v_mask
            g["s_hat"] = np.sum(a * dz_v, axis=0)
            g["u_hat"] = (h.T @ (dz_v * layer.s_hat)) * layer.u_mask
            delta = (dz_v * layer.s_hat) @ u.T
        else:
            g["weights"] = h.T @ delta
            delta = delta @ layer.weights.T
        grads[i] = g
    return grads


def predict(net: Network, x) -> np.ndarray:
    """Argmax of the logits; ties go to the lowest class index."""
    return np.argmax(forward(net, x), axis=1)


def _sgd_step(net: Network, grads, lr: float) -> None:
    for layer, g in zip(net.layers, grads):
        if isinstance(layer, FactoredLayer):
            layer.u_hat -= lr * g["u_hat"]
            layer.u_hat *= layer.u_mask
            layer.s_hat -= lr * g["s_hat"]
            layer.v_hat -= lr * g["v_hat"]
            layer.v_hat *= layer.v_mask
        else:
            layer.weights -= lr * g["weights"]
        layer.bias -= lr * g["bias"]


def train(net: Network, x, y, cfg: TrainConfig) -> Network:
    """Mini-batch SGD with step decay; returns a trained copy of ``net``.

    The shuffle order for every epoch comes from ``Rng(cfg.seed)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(x) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    x = _as_batch(net, x)
    if len(y) != len(x):
        raise ShapeError("targets and inputs differ in length")
    if y.min() < 0 or y.max() >= net.class_count:
        raise ShapeError("targets outside 0..K-1")
    out = net.copy()
    rng = Rng(cfg.seed)
    n = len(x)
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * cfg.lr_decay_gamma ** (epoch // cfg.lr_decay_every)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _sgd_step(out, gradient(out, x[idx], y[idx]), lr)
    return out
