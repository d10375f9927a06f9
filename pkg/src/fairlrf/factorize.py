"""Truncated-SVD replacement of a dense layer and stored-weight accounting."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import LayerError, RankError
from .network import DenseLayer, FactoredLayer, Network


@dataclass(frozen=True)
class WeightBudget:
    """Stored weights of one layer before and after factorization.

    The singular values are counted as a full k x k block, not k diagonal
    entries; a diagonal-only encoding would store ``factored_count - k*k + k``.
    """

    original_count: int
    factored_count: int
    zeroed_count: int = 0

    @property
    def stored_count(self) -> int:
        return self.factored_count - self.zeroed_count

    @property
    def reduction(self) -> float:
        return 1.0 - self.stored_count / self.original_count


def count_weights(d_in: int, d_out: int, k: int) -> WeightBudget:
    if d_in < 1 or d_out < 1 or k < 1 or k > min(d_in, d_out):
        raise RankError(f"invalid dims ({d_in}, {d_out}, k={k})")
    budget = WeightBudget(d_in * d_out, d_in * k + k * k + k * d_out, 0)
    if budget.factored_count > budget.original_count:
        warnings.warn(
            f"rank {k} factorization of a {d_in}x{d_out} layer stores more weights "
            f"({budget.factored_count}) than the dense layer ({budget.original_count})",
            stacklevel=2,
        )
    return budget


def layer_budget(layer) -> WeightBudget:
    if isinstance(layer, FactoredLayer):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            b = count_weights(layer.d_in, layer.d_out, layer.k)
        return WeightBudget(b.original_count, b.factored_count, layer.zeroed_count)
    n = layer.d_in * layer.d_out
    return WeightBudget(n, n, 0)


def stored_weights(net: Network) -> int:
    """Total stored weight count, biases included."""
    return sum(layer_budget(layer).stored_count + len(layer.bias) for layer in net.layers)


def compression_rate(model_before: Network, model_after: Network) -> float:
    return stored_weights(model_before) / stored_weights(model_after)


def factorize_layer(net: Network, layer_index: int, k: int) -> Network:
    """Copy of ``net`` whose layer ``layer_index`` is replaced by rank-k factors."""
    if not 0 <= layer_index < len(net.layers):
        raise LayerError(f"layer index {layer_index} out of range 0..{len(net.layers) - 1}")
    layer = net.layers[layer_index]
    if not isinstance(layer, DenseLayer):
        raise LayerError(f"layer {layer_index} is already factored")
    if not 1 <= k <= min(layer.d_in, layer.d_out):
        raise RankError(f"k={k} outside 1..{min(layer.d_in, layer.d_out)}")
    count_weights(layer.d_in, layer.d_out, k)  # warns on expansion
    f = linalg.truncate(linalg.svd(layer.weights), k)
    out = net.copy()
    out.layers[layer_index] = FactoredLayer(
        u_hat=f.u.copy(),
        s_hat=f.s.copy(),
        v_hat=np.ascontiguousarray(f.v.T),
        bias=layer.bias.copy(),
        activation=layer.activation,
    )
    return out
