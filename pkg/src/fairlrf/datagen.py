"""Synthetic classification data with a binary sensitive attribute.

Each class has a fixed mean; a sample is ``mean + noise_g * N(0, I)`` where
the noise scale depends on the sample's group. A noisier group 0 is harder
to classify, which is the bias the fairness metrics pick up.
"""

from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DataError, FormatError
from .rng import Rng

SPLITS = ("train", "validation", "test")


@dataclass
class GenParams:
    n: int = 4000
    d: int = 16
    K: int = 4
    group0_fraction: float = 0.35
    noise0: float = 1.6
    noise1: float = 0.8
    separation: float = 3.0
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1 or self.d < 1 or self.K < 2:
            raise DataError("n, d must be positive and K >= 2")
        if self.n < 10 * self.K:
            raise DataError(f"n={self.n} below 10*K={10 * self.K}")
        if not 0 < self.group0_fraction < 1:
            raise DataError("group0_fraction must lie in (0, 1)")
        if self.noise0 <= 0 or self.noise1 <= 0 or self.separation < 0:
            raise DataError("noise scales must be positive and separation non-negative")


@dataclass
class GroupedDataset:
    x: np.ndarray
    y: np.ndarray  # 1-based labels
    c: np.ndarray  # sensitive attribute, 0 or 1
    K: int
    split: np.ndarray | None = None  # "train" / "validation" / "test" per sample
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def targets(self) -> np.ndarray:
        """0-based labels for the network."""
        return self.y - 1

    def subset(self, idx) -> "GroupedDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return GroupedDataset(
            self.x[idx], self.y[idx], self.c[idx], self.K,
            None if self.split is None else self.split[idx], dict(self.params),
        )

    def part(self, name: str) -> "GroupedDataset":
        if self.split is None:
            raise DataError("dataset has no split tags")
        return self.subset(np.flatnonzero(self.split == name))


def generate(p: GenParams) -> GroupedDataset:
    """Draw a dataset.

    Stream order: K class-mean directions (d normals each), one permutation
    of the samples whose first ``round(group0_fraction * n)`` entries form
    group 0, then d normals per sample in index order. Labels cycle 1..K.
    """
    p.validate()
    rng = Rng(p.seed)
    means = np.zeros((p.K, p.d))
    for k in range(p.K):
        z = rng.normal_array((p.d,))
        means[k] = p.separation * z / np.linalg.norm(z)
    y = np.arange(p.n) % p.K + 1
    c = np.ones(p.n, dtype=np.int64)
    c[rng.permutation(p.n)[:int(round(p.group0_fraction * p.n))]] = 0
    scale = np.where(c == 0, p.noise0, p.noise1)
    x = means[y - 1] + scale[:, None] * rng.normal_array((p.n, p.d))
    for k in range(1, p.K + 1):
        for g in (0, 1):
            if np.sum((y == k) & (c == g)) < 2:
                raise DataError(f"fewer than 2 samples for class {k}, group {g}")
    return GroupedDataset(x, y.astype(np.int64), c, p.K, None, asdict(p))


def split(ds: GroupedDataset, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> GroupedDataset:
    """Stratified train / validation / test tags.

    Samples are shuffled, then interleaved so that every (class, group) cell
    is spread evenly through the ordering; the first ``n - n_val - n_test``
    positions become train, the next ``floor(f_val*n)`` validation and the
    last ``floor(f_test*n)`` test.
    """
    f = [float(v) for v in fractions]
    if len(f) != 3 or any(v < 0 for v in f) or abs(sum(f) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions {fractions} must be three non-negative values summing to 1")
    n = len(ds)
    rng = Rng(seed)
    order = rng.permutation(n)
    cell = (ds.y[order] - 1) * 2 + ds.c[order]
    key = np.zeros(n)
    for cid in np.unique(cell):
        pos = np.flatnonzero(cell == cid)
        key[pos] = (np.arange(len(pos)) + 0.5) / len(pos)
    order = order[np.argsort(key, kind="stable")]
    n_val = int(math.floor(f[1] * n + 1e-9))
    n_test = int(math.floor(f[2] * n + 1e-9))
    n_train = n - n_val - n_test
    tags = np.empty(n, dtype=object)
    tags[order[:n_train]] = "train"
    tags[order[n_train:n_train + n_val]] = "validation"
    tags[order[n_train + n_val:]] = "test"
    tags = tags.astype("<U10")
    for name in SPLITS:
        groups = set(ds.c[tags == name].tolist())
        if np.any(tags == name) and groups != {0, 1}:
            raise DataError(f"split {name!r} lacks one sensitive group")
    return GroupedDataset(ds.x, ds.y, ds.c, ds.K, tags, dict(ds.params))


def to_csv(ds: GroupedDataset) -> str:
    buf = io.StringIO()
    d = ds.x.shape[1]
    buf.write(",".join([f"f{i}" for i in range(d)] + ["label", "group"]) + "\n")
    for xi, yi, ci in zip(ds.x, ds.y, ds.c):
        buf.write(",".join([repr(float(v)) for v in xi] + [str(int(yi)), str(int(ci))]) + "\n")
    return buf.getvalue()


def write_csv(ds: GroupedDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_csv(ds))


def read_csv(path, K: int | None = None) -> GroupedDataset:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[-2:] != ["label", "group"] or header[:-2] != [f"f{i}" for i in range(len(header) - 2)]:
        raise FormatError(f"{path}: unexpected header {lines[0]!r}")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    try:
        x = np.array([[float(v) for v in r[:-2]] for r in rows], dtype=np.float64)
        y = np.array([int(r[-2]) for r in rows], dtype=np.int64)
        c = np.array([int(r[-1]) for r in rows], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise FormatError(f"{path}: non-finite feature")
    if len(y) == 0:
        raise DataError(f"{path}: no samples")
    if not np.all((c == 0) | (c == 1)):
        raise FormatError(f"{path}: group must be 0 or 1")
    K = int(y.max()) if K is None else K
    if y.min() < 1 or y.max() > K:
        raise FormatError(f"{path}: label outside 1..{K}")
    return GroupedDataset(x, y, c, K, None, {"path": str(path)})
