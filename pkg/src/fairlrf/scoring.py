"""Per-group diagonal Hessians and fairness-aware removal scores."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .errors import DataError, EmptyBatch, ShapeError, TargetError
from .network import FactoredLayer, Network, gradient, layer_activations
from .rng import Rng

FACTORS = ("u_hat", "v_hat")


@dataclass(frozen=True)
class FactorId:
    layer_index: int
    factor: str  # "u_hat" or "v_hat"


@dataclass
class ScoreMatrix:
    target: FactorId
    values: np.ndarray


@dataclass
class ScoringSets:
    """Indices (into the training split) of the per-group scoring samples."""

    group0: np.ndarray
    group1: np.ndarray


def _factor(net: Network, target: FactorId) -> np.ndarray:
    if target.factor not in FACTORS:
        raise TargetError(f"unknown factor {target.factor!r}")
    if not 0 <= target.layer_index < len(net.layers):
        raise TargetError(f"layer {target.layer_index} does not exist")
    layer = net.layers[target.layer_index]
    if not isinstance(layer, FactoredLayer):
        raise TargetError(f"layer {target.layer_index} is not factored")
    return getattr(layer, target.factor)


def hessian_diagonal(net: Network, x, y, target: FactorId) -> ScoreMatrix:
    """Diagonal of the Hessian of the mean loss w.r.t. one factor matrix.

    Each entry is a central difference of the analytic gradient,
    ``(g(t+e) - g(t-e)) / 2e`` with ``e = 1e-4 * max(1, |t|)``.
    ``y`` holds 0-based targets.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) == 0:
        raise EmptyBatch("scoring set is empty")
    _factor(net, target)
    li, name = target.layer_index, target.factor
    # layers before the target do not depend on it: probe only the tail
    x_tail, _ = layer_activations(net, x, li)
    work = Network([copy.deepcopy(layer) for layer in net.layers[li:]], net.class_count)
    theta = getattr(work.layers[0], name)
    h = np.zeros(theta.shape)
    for idx in np.ndindex(theta.shape):
        t0 = theta[idx]
        eps = 1e-4 * max(1.0, abs(t0))
        theta[idx] = t0 + eps
        gp = gradient(work, x_tail, y)[0][name][idx]
        theta[idx] = t0 - eps
        gm = gradient(work, x_tail, y)[0][name][idx]
        theta[idx] = t0
        h[idx] = (gp - gm) / (2.0 * eps)
    return ScoreMatrix(target, h)


def fairness_scores(h0: ScoreMatrix, h1: ScoreMatrix, theta: np.ndarray, beta: float) -> ScoreMatrix:
    """``0.5 * theta**2 * (h0 - beta * h1)``; lower means better to remove."""
    theta = np.asarray(theta, dtype=np.float64)
    if h0.values.shape != theta.shape or h1.values.shape != theta.shape:
        raise ShapeError("Hessian and factor shapes differ")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    s = 0.5 * np.square(theta) * (h0.values - beta * h1.values)
    return ScoreMatrix(h0.target, s)


def delta_e_estimate(theta_i: float, h_ii: float) -> float:
    """Second-order loss change predicted for zeroing one weight."""
    return 0.5 * h_ii * theta_i * theta_i


def build_scoring_sets(groups, per_group: int, seed: int) -> ScoringSets:
    """Draw ``per_group`` training indices from each sensitive group.

    Indices come back sorted (canonical order). ``groups`` is the 0/1
    sensitive attribute of every training sample.
    """
    groups = np.asarray(groups)
    rng = Rng(seed)
    picked = []
    for g in (0, 1):
        members = np.flatnonzero(groups == g)
        if per_group < 1 or len(members) < per_group:
            raise DataError(f"group {g} has {len(members)} samples, need {per_group}")
        if per_group == len(members):
            picked.append(members)
        else:
            picked.append(np.sort(members[rng.permutation(len(members))[:per_group]]))
    return ScoringSets(picked[0], picked[1])
