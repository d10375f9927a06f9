"""Per-group confusion tallies, accuracy metrics and EOpp / EOdd.

Labels and predictions are 1-based class ids (1..K); group 0 is the
unprivileged group. Per-group precision, recall and F1 are macro averages
over classes. Any rate with a zero denominator is defined as 0 and the
(group, class, rate) triple is recorded in ``GroupConfusion.zero_division``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import LabelError, ShapeError

TP, FP, TN, FN = range(4)


@dataclass
class GroupConfusion:
    class_count: int
    tallies: np.ndarray  # int64, shape (2, K, 4): [group][class-1][TP, FP, TN, FN]

    def _rate(self, num: np.ndarray, den: np.ndarray) -> np.ndarray:
        den = den.astype(np.float64)
        return np.divide(num, den, out=np.zeros_like(den), where=den > 0)

    def tpr(self) -> np.ndarray:
        t = self.tallies
        return self._rate(t[..., TP], t[..., TP] + t[..., FN])

    def tnr(self) -> np.ndarray:
        t = self.tallies
        return self._rate(t[..., TN], t[..., TN] + t[..., FP])

    def fpr(self) -> np.ndarray:
        t = self.tallies
        return self._rate(t[..., FP], t[..., FP] + t[..., TN])

    def precision(self) -> np.ndarray:
        t = self.tallies
        return self._rate(t[..., TP], t[..., TP] + t[..., FP])

    @property
    def zero_division(self) -> list[tuple[int, int, str]]:
        t = self.tallies
        dens = {
            "tpr": t[..., TP] + t[..., FN],
            "tnr": t[..., TN] + t[..., FP],
            "precision": t[..., TP] + t[..., FP],
        }
        out = []
        for name, den in dens.items():
            for g, k in zip(*np.nonzero(den == 0)):
                out.append((int(g), int(k) + 1, name))
        return sorted(out)


def confusion(preds, labels, groups, class_count: int) -> GroupConfusion:
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    groups = np.asarray(groups, dtype=np.int64).reshape(-1)
    if not len(preds) == len(labels) == len(groups):
        raise ShapeError("preds, labels and groups differ in length")
    for name, arr in (("prediction", preds), ("label", labels)):
        if arr.size and (arr.min() < 1 or arr.max() > class_count):
            raise LabelError(f"{name} outside 1..{class_count}")
    if groups.size and not np.all((groups == 0) | (groups == 1)):
        raise LabelError("group must be 0 or 1")
    tallies = np.zeros((2, class_count, 4), dtype=np.int64)
    classes = np.arange(1, class_count + 1)[None, :]
    for g in (0, 1):
        sel = groups == g
        p = preds[sel][:, None] == classes
        t = labels[sel][:, None] == classes
        tallies[g, :, TP] = np.sum(p & t, axis=0)
        tallies[g, :, FP] = np.sum(p & ~t, axis=0)
        tallies[g, :, TN] = np.sum(~p & ~t, axis=0)
        tallies[g, :, FN] = np.sum(~p & t, axis=0)
    return GroupConfusion(class_count, tallies)


def eopp0(c: GroupConfusion) -> float:
    r = c.tnr()
    return float(np.sum(np.abs(r[1] - r[0])))


def eopp1(c: GroupConfusion) -> float:
    r = c.tpr()
    return float(np.sum(np.abs(r[1] - r[0])))


def eodd(c: GroupConfusion) -> float:
    tpr, fpr = c.tpr(), c.fpr()
    return float(np.sum(np.abs(tpr[1] - tpr[0] + fpr[1] - fpr[0])))


@dataclass
class GroupPRF:
    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]

    def avg(self, metric: str) -> float:
        a, b = getattr(self, metric)
        return (a + b) / 2.0

    def diff(self, metric: str) -> float:
        a, b = getattr(self, metric)
        return abs(b - a)


def group_prf(c: GroupConfusion) -> GroupPRF:
    p = c.precision()
    r = c.tpr()
    denom = p + r
    f1 = np.divide(2 * p * r, denom, out=np.zeros_like(denom), where=denom > 0)
    macro = lambda m: (float(np.mean(m[0])), float(np.mean(m[1])))  # noqa: E731
    return GroupPRF(macro(p), macro(r), macro(f1))


CSV_COLUMNS = [
    "method", "seed", "k", "layer", "strategy", "sr", "rr", "rr_semantics", "beta",
    "precision_g0", "precision_g1", "precision_avg", "precision_diff",
    "recall_g0", "recall_g1", "recall_avg", "recall_diff",
    "f1_g0", "f1_g1", "f1_avg", "f1_diff",
    "eopp0", "eopp1", "eodd", "compression_rate",
    "val_precision_avg", "val_eopp1", "val_eodd",
    "zeroed_count", "zero_division", "tallies",
]


@dataclass
class FairnessReport:
    confusion: GroupConfusion
    compression_rate: float
    config: dict = field(default_factory=dict)
    validation: GroupConfusion | None = None
    zeroed_count: int = 0

    @property
    def prf(self) -> GroupPRF:
        return group_prf(self.confusion)

    @property
    def eopp0(self) -> float:
        return eopp0(self.confusion)

    @property
    def eopp1(self) -> float:
        return eopp1(self.confusion)

    @property
    def eopp(self) -> float:
        return self.eopp1

    @property
    def eodd(self) -> float:
        return eodd(self.confusion)

    def row(self) -> dict:
        prf = self.prf
        cfg = self.config
        out = {
            "method": cfg.get("method", ""),
            "seed": cfg.get("seed", ""),
            "k": cfg.get("k", ""),
            "layer": cfg.get("layer", ""),
            "strategy": cfg.get("strategy", ""),
            "sr": cfg.get("sr", ""),
            "rr": cfg.get("rr", ""),
            "rr_semantics": cfg.get("rr_semantics", ""),
            "beta": cfg.get("beta", ""),
        }
        for m in ("precision", "recall", "f1"):
            g0, g1 = getattr(prf, m)
            out[f"{m}_g0"] = g0
            out[f"{m}_g1"] = g1
            out[f"{m}_avg"] = prf.avg(m)
            out[f"{m}_diff"] = prf.diff(m)
        out["eopp0"] = self.eopp0
        out["eopp1"] = self.eopp1
        out["eodd"] = self.eodd
        out["compression_rate"] = self.compression_rate
        if self.validation is not None:
            out["val_precision_avg"] = group_prf(self.validation).avg("precision")
            out["val_eopp1"] = eopp1(self.validation)
            out["val_eodd"] = eodd(self.validation)
        else:
            out["val_precision_avg"] = out["val_eopp1"] = out["val_eodd"] = ""
        out["zeroed_count"] = self.zeroed_count
        out["zero_division"] = ";".join(f"g{g}k{k}:{n}" for g, k, n in self.confusion.zero_division)
        out["tallies"] = " ".join(str(int(v)) for v in self.confusion.tallies.reshape(-1))
        return out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def reports_to_csv(reports: list[FairnessReport], header_lines: list[str] = ()) -> str:
    """CSV text with fixed column order; ``header_lines`` become ``#`` comments."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.row()
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_report_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def tallies_from_row(row: dict, class_count: int) -> GroupConfusion:
    vals = np.array([int(v) for v in row["tallies"].split()], dtype=np.int64)
    return GroupConfusion(class_count, vals.reshape(2, class_count, 4))


def format_table(entries: list[tuple[str, FairnessReport]], group_names=("Group 0", "Group 1")) -> str:
    """Aligned text table: one block per method with per-group, average and difference rows."""
    head = f"{'Method':<26}{'Group':<10}{'Precision':>10}{'Recall':>10}{'F1-Score':>10}{'EOpp':>9}{'EOdd':>9}{'C.R.':>10}"
    rule = "-" * len(head)
    out = [rule, head, rule]
    for name, rep in entries:
        prf = rep.prf
        rows = [
            (group_names[0], prf.precision[0], prf.recall[0], prf.f1[0]),
            (group_names[1], prf.precision[1], prf.recall[1], prf.f1[1]),
            ("Avg.", prf.avg("precision"), prf.avg("recall"), prf.avg("f1")),
            ("Diff.", prf.diff("precision"), prf.diff("recall"), prf.diff("f1")),
        ]
        for i, (g, p, r, f) in enumerate(rows):
            label = name if i == 0 else ""
            tail = f"{rep.eopp1:>9.3f}{rep.eodd:>9.3f}{rep.compression_rate:>9.3f}x" if i == 0 else ""
            out.append(f"{label:<26}{g:<10}{p:>10.3f}{r:>10.3f}{f:>10.3f}{tail}")
        out.append(rule)
    return "\n".join(out) + "\n"
