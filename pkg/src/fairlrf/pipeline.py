"""End-to-end workflow: data -> pre-trained model -> truncated SVD ->
per-group scoring -> sparse SVD -> evaluation and reports.

No step fine-tunes or retrains the model after it has been pre-trained.
"""

from __future__ import annotations

import logging
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__, datagen, fileio
from .config import RunConfig, config_to_text
from .errors import ConfigError
from .factorize import compression_rate, factorize_layer
from .metrics import FairnessReport, confusion, format_table, reports_to_csv
from .network import Network, init_network, layer_activations, predict, train
from .scoring import FactorId, build_scoring_sets, fairness_scores, hessian_diagonal
from .sparsify import ScoringContext, SparsifyPlan, sparsify

log = logging.getLogger(__name__)

SWEEP_AXES = ("sr", "rr", "beta", "k", "layer")
PLOT_METRICS = ("precision_avg", "recall_avg", "f1_avg", "eopp1", "eodd", "compression_rate",
                "val_precision_avg", "val_eopp1")

REPORT_NOTES = [
    "per-group precision/recall/F1 are macro averages over classes",
    "EOpp is EOpp1 (true-positive-rate gaps); zero-denominator rates are 0 and listed in zero_division",
    "hyper-parameters are chosen on the validation split; reported metrics are on the test split",
    "C.R. counts singular values as a k x k block (diagonal-only storage would keep k values); biases included",
]


@dataclass
class Prepared:
    """Dataset splits and the pre-trained model shared by every method."""

    data: datagen.GroupedDataset
    base: Network
    # per-group Hessians keyed by (layer, k, factor, scoring_size, seed); they do not depend on beta
    hessians: dict = field(default_factory=dict)

    @property
    def train(self) -> datagen.GroupedDataset:
        return self.data.part("train")


def load_data(cfg: RunConfig) -> datagen.GroupedDataset:
    if cfg.data:
        ds = datagen.read_csv(cfg.data, K=cfg.classes)
    else:
        ds = datagen.generate(cfg.gen_params())
    return datagen.split(ds, seed=cfg.seed)


def pretrain(cfg: RunConfig, data: datagen.GroupedDataset) -> Network:
    tr = data.part("train")
    sizes = [tr.x.shape[1], *cfg.hidden, cfg.classes]
    net = init_network(sizes, cfg.seed)
    return train(net, tr.x, tr.targets, cfg.train_config())


def prepare(cfg: RunConfig) -> Prepared:
    data = load_data(cfg)
    if cfg.model:
        base = fileio.load_network(cfg.model)
    else:
        base = pretrain(cfg, data)
    if base.d_in != data.x.shape[1] or base.class_count != cfg.classes:
        raise ConfigError("model does not match the dataset width or class count")
    return Prepared(data, base)


def scoring_context(net: Network, prep: Prepared, cfg: RunConfig) -> ScoringContext:
    """Inputs for the configured strategy, computed on the training split."""
    li, tr = cfg.layer, prep.train
    if cfg.method == "slr_w":
        return ScoringContext(dense_weights=prep.base.layers[li].weights)
    counts = [int(np.sum(tr.c == g)) for g in (0, 1)]
    per_group = min(cfg.scoring_size, *counts)
    sets = build_scoring_sets(tr.c, per_group, cfg.seed)
    if cfg.method == "slr_a":
        idx = np.concatenate([sets.group0, sets.group1])
        a_in, a_out = layer_activations(net, tr.x[idx], li)
        return ScoringContext(input_activations=a_in, output_preactivations=a_out)
    scores = {}
    for factor in ("u_hat", "v_hat"):
        key = (li, cfg.k, factor, per_group, cfg.seed)
        if key not in prep.hessians:
            target = FactorId(li, factor)
            prep.hessians[key] = tuple(
                hessian_diagonal(net, tr.x[idx], tr.targets[idx], target) for idx in (sets.group0, sets.group1)
            )
        h0, h1 = prep.hessians[key]
        theta = getattr(net.layers[li], factor)
        scores[factor] = fairness_scores(h0, h1, theta, cfg.beta).values
    return ScoringContext(scores_u=scores["u_hat"], scores_v=scores["v_hat"])


def process(prep: Prepared, cfg: RunConfig) -> tuple[Network, SparsifyPlan | None]:
    """Apply the configured method to the pre-trained model."""
    base = prep.base
    if cfg.method == "vanilla":
        return base.copy(), None
    net = factorize_layer(base, cfg.layer, cfg.k)
    if cfg.method == "truncated":
        return net, None
    ctx = scoring_context(net, prep, cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sparsify(net, cfg.layer, cfg.method, cfg.sr, cfg.rr, cfg.rr_semantics, cfg.beta, ctx)


def evaluate(net: Network, base: Network, data: datagen.GroupedDataset, cfg: RunConfig,
             plan: SparsifyPlan | None = None) -> FairnessReport:
    parts = {}
    for name in ("validation", "test"):
        p = data.part(name)
        parts[name] = confusion(predict(net, p.x) + 1, p.y, p.c, cfg.classes)
    echo = {
        "method": cfg.method,
        "seed": cfg.seed,
        "k": "" if cfg.method == "vanilla" else cfg.k,
        "layer": "" if cfg.method == "vanilla" else cfg.layer,
        "strategy": cfg.method if cfg.method in ("slr_w", "slr_a", "fairlrf") else "",
        "sr": cfg.sr if plan else "",
        "rr": cfg.rr if plan else "",
        "rr_semantics": cfg.rr_semantics if plan else "",
        "beta": cfg.beta if cfg.method == "fairlrf" else "",
    }
    return FairnessReport(
        confusion=parts["test"],
        compression_rate=compression_rate(base, net),
        config=echo,
        validation=parts["validation"],
        zeroed_count=plan.zeroed_count if plan else 0,
    )


def header_lines(cfg: RunConfig) -> list[str]:
    lines = [f"fairlrf {__version__}"]
    lines += [f"config {k} = {v}" for k, v in cfg.resolved().items()]
    lines += [f"note: {n}" for n in REPORT_NOTES]
    return lines


METHOD_LABELS = {"vanilla": "Vanilla", "truncated": "Truncated SVD", "slr_w": "SLR-w", "slr_a": "SLR-a",
                 "fairlrf": "FairLRF"}


def method_label(method: str) -> str:
    return METHOD_LABELS[method]


def write_outputs(out_dir, cfg: RunConfig, report: FairnessReport, net: Network, plan: SparsifyPlan | None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports_to_csv([report], header_lines(cfg)))
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"fairlrf {__version__}\n\n")
        fh.write(format_table([(method_label(cfg.method), report)]))
        fh.write("\n" + "".join(f"* {n}\n" for n in REPORT_NOTES))
        fh.write(f"* rr semantics: {cfg.rr_semantics}\n\n[config]\n")
        fh.write(config_to_text(cfg))
    with open(os.path.join(out_dir, "plan.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(plan.to_text() if plan else f"method = {cfg.method}\nno sparsification\n")
    fileio.save_network(net, os.path.join(out_dir, "model.flrw"))


def run(cfg: RunConfig, prep: Prepared | None = None) -> FairnessReport:
    cfg.validate()
    prep = prep or prepare(cfg)
    net, plan = process(prep, cfg)
    report = evaluate(net, prep.base, prep.data, cfg, plan)
    if cfg.out:
        write_outputs(cfg.out, cfg, report, net, plan)
        if cfg.method == "fairlrf":
            _write_hessians(cfg.out, prep, cfg)
    return report


def _write_hessians(out_dir, prep: Prepared, cfg: RunConfig) -> None:
    for (li, k, factor, _, seed), pair in prep.hessians.items():
        if (li, k, seed) == (cfg.layer, cfg.k, cfg.seed):
            for g, h in enumerate(pair):
                fileio.save_matrix(h.values, os.path.join(out_dir, f"hessian_{factor}_g{g}.flrm"))


def _axis_value(axis: str, value):
    if axis in ("k", "layer"):
        return int(value)
    return float(value)


def sweep(cfg: RunConfig, axis: str, values) -> list[FairnessReport]:
    """One run per value on a single shared pre-trained model.

    Writes ``sweep.csv`` (rewritten after every run so partial results
    survive an abort), ``plotdata_<metric>.csv`` and one subdirectory per
    value. The base model is cached as ``base_model.flrw``.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    cfg.validate()
    prep = prepare(cfg)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        fileio.save_network(prep.base, os.path.join(cfg.out, "base_model.flrw"))
    reports = []
    for i, raw in enumerate(values):
        value = _axis_value(axis, raw)
        sub = cfg.replace(**{axis: value})
        if axis == "layer":
            layer = prep.base.layers[value] if 0 <= value < len(prep.base.layers) else None
            if layer is not None and sub.k > min(layer.d_in, layer.d_out):
                log.warning("k=%d exceeds the rank of layer %d; using %d", sub.k, value,
                            min(layer.d_in, layer.d_out))
                sub = sub.replace(k=min(layer.d_in, layer.d_out))
        sub = sub.replace(out=os.path.join(cfg.out, f"{axis}_{i:02d}") if cfg.out else "")
        reports.append(run(sub, prep))
        if cfg.out:
            _write_sweep(cfg, axis, values[: i + 1], reports)
    return reports


def _write_sweep(cfg: RunConfig, axis: str, values, reports) -> None:
    lines = header_lines(cfg) + [f"sweep axis = {axis}"]
    with open(os.path.join(cfg.out, "sweep.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(reports_to_csv(reports, lines))
    for metric in PLOT_METRICS:
        with open(os.path.join(cfg.out, f"plotdata_{metric}.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{axis},{metric}\n")
            for v, r in zip(values, reports):
                fh.write(f"{_axis_value(axis, v)!r},{r.row()[metric]!r}\n")


def select_best(reports: list[FairnessReport], baseline: FairnessReport, max_precision_drop: float = 0.02) -> FairnessReport:
    """Lowest validation EOpp among reports whose validation average precision
    stays within ``max_precision_drop`` of the baseline; if none qualifies,
    the one with the highest validation average precision."""
    base_p = baseline.row()["val_precision_avg"]
    rows = [r.row() for r in reports]
    ok = [i for i, row in enumerate(rows) if row["val_precision_avg"] >= base_p - max_precision_drop]
    if ok:
        best = min(ok, key=lambda i: (rows[i]["val_eopp1"], i))
    else:
        best = max(range(len(rows)), key=lambda i: (rows[i]["val_precision_avg"], -i))
    return reports[best]
