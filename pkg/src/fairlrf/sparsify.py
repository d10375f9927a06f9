"""Sparse SVD: zero the tail entries of selected factor lines.

Lines are rows of ``u_hat`` (d_in x k) and columns of ``v_hat`` (k x d_out).
Within a selected line the dropped positions are always the last ones along
the k axis, i.e. those paired with the smallest kept singular values. The
strategies only differ in how lines are ranked:

* ``slr_w``   - sum of |W| over the matching row / column of the dense weights
* ``slr_a``   - mean |input activation| (u rows) and mean |pre-activation
  output| (v columns) over the scoring data
* ``fairlrf`` - sum of fairness-aware scores over the droppable tail entries
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContextError, LayerError, PlanError
from .network import FactoredLayer, Network

STRATEGIES = ("slr_w", "slr_a", "fairlrf")
RR_SEMANTICS = ("removed", "retained")


def rate_count(rate: float, n: int) -> int:
    """floor(rate * n), tolerant of binary rounding (e.g. (1/3) * 3)."""
    return int(math.floor(rate * n + 1e-9))


def drop_count(rr: float, k: int, semantics: str = "removed") -> int:
    if semantics == "removed":
        return rate_count(rr, k)
    if semantics == "retained":
        return rate_count(1.0 - rr, k)
    raise PlanError(f"unknown rr semantics {semantics!r}")


@dataclass
class ScoringContext:
    """Strategy inputs; only the fields the chosen strategy needs are set."""

    dense_weights: np.ndarray | None = None
    input_activations: np.ndarray | None = None
    output_preactivations: np.ndarray | None = None
    scores_u: np.ndarray | None = None
    scores_v: np.ndarray | None = None


@dataclass
class SparsifyPlan:
    strategy: str
    sr: float
    rr: float
    rr_semantics: str = "removed"
    beta: float | None = None
    selected_rows_u: list = field(default_factory=list)
    selected_cols_v: list = field(default_factory=list)
    drop_count_per_line: int = 0
    zeroed_count: int = 0

    def to_text(self) -> str:
        lines = [
            f"strategy = {self.strategy}",
            f"sr = {self.sr!r}",
            f"rr = {self.rr!r}",
            f"rr_semantics = {self.rr_semantics}",
            f"beta = {self.beta!r}",
            f"drop_count_per_line = {self.drop_count_per_line}",
            f"selected_rows_u = {' '.join(map(str, self.selected_rows_u))}",
            f"selected_cols_v = {' '.join(map(str, self.selected_cols_v))}",
            f"zeroed_count = {self.zeroed_count}",
        ]
        return "\n".join(lines) + "\n"


def line_scores(layer: FactoredLayer, strategy: str, context: ScoringContext, drop: int | None = None):
    """(row scores of u_hat, column scores of v_hat) for one strategy.

    ``drop`` is the per-line tail length; fairlrf sums only over that tail
    (the whole line when ``drop`` is None, 0 or k).
    """
    k = layer.k
    if strategy == "slr_w":
        if context.dense_weights is None:
            raise ContextError("slr_w needs the dense weight matrix")
        w = np.abs(np.asarray(context.dense_weights, dtype=np.float64))
        if w.shape != (layer.d_in, layer.d_out):
            raise ContextError("dense weights do not match the layer shape")
        return w.sum(axis=1), w.sum(axis=0)
    if strategy == "slr_a":
        if context.input_activations is None or context.output_preactivations is None:
            raise ContextError("slr_a needs layer input and output activations")
        a_in = np.asarray(context.input_activations, dtype=np.float64)
        a_out = np.asarray(context.output_preactivations, dtype=np.float64)
        if a_in.shape[1] != layer.d_in or a_out.shape[1] != layer.d_out:
            raise ContextError("activation widths do not match the layer")
        return np.abs(a_in).mean(axis=0), np.abs(a_out).mean(axis=0)
    if strategy == "fairlrf":
        if context.scores_u is None or context.scores_v is None:
            raise ContextError("fairlrf needs fairness score matrices for u_hat and v_hat")
        su = np.asarray(context.scores_u, dtype=np.float64)
        sv = np.asarray(context.scores_v, dtype=np.float64)
        if su.shape != layer.u_hat.shape or sv.shape != layer.v_hat.shape:
            raise ContextError("score matrices do not match the factor shapes")
        tail = k if not drop else drop
        return su[:, k - tail:].sum(axis=1), sv[k - tail:, :].sum(axis=0)
    raise ContextError(f"unknown strategy {strategy!r}")


def select_lines(scores, sr: float) -> list[int]:
    """Indices of the floor(sr*n) smallest scores, ties to the lowest index."""
    if not 0 <= sr <= 1:
        raise PlanError(f"sr={sr} outside [0, 1]")
    scores = np.asarray(scores, dtype=np.float64)
    m = rate_count(sr, len(scores))
    order = np.argsort(scores, kind="stable")
    return sorted(int(i) for i in order[:m])


def apply_plan(layer: FactoredLayer, plan: SparsifyPlan) -> FactoredLayer:
    """New layer with the planned tail entries zeroed and masked out."""
    k = layer.k
    d = plan.drop_count_per_line
    if not 0 <= d <= k:
        raise PlanError(f"drop count {d} outside 0..{k}")
    rows = np.asarray(plan.selected_rows_u, dtype=np.int64)
    cols = np.asarray(plan.selected_cols_v, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= layer.d_in):
        raise PlanError("selected u row out of range")
    if cols.size and (cols.min() < 0 or cols.max() >= layer.d_out):
        raise PlanError("selected v column out of range")
    if d == 0 or (rows.size == 0 and cols.size == 0):
        warnings.warn("sparsification plan removes nothing; layer unchanged", stacklevel=2)
    u_mask = layer.u_mask.copy()
    v_mask = layer.v_mask.copy()
    if d:
        u_mask[rows[:, None], np.arange(k - d, k)[None, :]] = False
        v_mask[np.arange(k - d, k)[:, None], cols[None, :]] = False
    out = FactoredLayer(
        u_hat=np.where(u_mask, layer.u_hat, 0.0),
        s_hat=layer.s_hat.copy(),
        v_hat=np.where(v_mask, layer.v_hat, 0.0),
        bias=layer.bias.copy(),
        activation=layer.activation,
        u_mask=u_mask,
        v_mask=v_mask,
    )
    plan.zeroed_count = out.zeroed_count - layer.zeroed_count
    return out


def make_plan(layer: FactoredLayer, strategy: str, sr: float, rr: float, rr_semantics: str,
              beta: float | None, context: ScoringContext) -> SparsifyPlan:
    if strategy not in STRATEGIES:
        raise PlanError(f"unknown strategy {strategy!r}")
    if not 0 <= rr <= 1:
        raise PlanError(f"rr={rr} outside [0, 1]")
    d = drop_count(rr, layer.k, rr_semantics)
    row_scores, col_scores = line_scores(layer, strategy, context, drop=d)
    return SparsifyPlan(
        strategy=strategy,
        sr=sr,
        rr=rr,
        rr_semantics=rr_semantics,
        beta=beta if strategy == "fairlrf" else None,
        selected_rows_u=select_lines(row_scores, sr),
        selected_cols_v=select_lines(col_scores, sr),
        drop_count_per_line=d,
    )


def sparsify(net: Network, layer_index: int, strategy: str, sr: float, rr: float,
             rr_semantics: str, beta: float | None, context: ScoringContext) -> tuple[Network, SparsifyPlan]:
    if not 0 <= layer_index < len(net.layers) or not isinstance(net.layers[layer_index], FactoredLayer):
        raise LayerError(f"layer {layer_index} is not a factored layer")
    layer = net.layers[layer_index]
    plan = make_plan(layer, strategy, sr, rr, rr_semantics, beta, context)
    out = net.copy()
    out.layers[layer_index] = apply_plan(layer, plan)
    return out, plan
