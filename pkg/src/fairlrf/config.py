"""Run configuration and the ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from .datagen import GenParams
from .errors import ConfigError
from .network import TrainConfig
from .sparsify import RR_SEMANTICS

METHODS = ("vanilla", "truncated", "slr_w", "slr_a", "fairlrf")


def _parse_hidden(value) -> tuple[int, ...]:
    if isinstance(value, (tuple, list)):
        return tuple(int(v) for v in value)
    text = str(value).strip()
    if not text:
        return ()
    return tuple(int(v) for v in text.split(","))


def parse_number(text: str) -> float:
    """Float, also accepting fractions such as ``5/9``."""
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


@dataclass
class RunConfig:
    # data: a CSV path, or generation parameters
    data: str = ""
    n: int = 4000
    d: int = 16
    classes: int = 4
    group0_fraction: float = 0.35
    noise0: float = 1.6
    noise1: float = 0.8
    separation: float = 3.0
    # architecture and training
    hidden: tuple = (32, 32)
    model: str = ""
    epochs: int = 100
    learning_rate: float = 0.01
    lr_decay_every: int = 10
    lr_decay_gamma: float = 0.57
    batch_size: int = 128
    # compression
    method: str = "fairlrf"
    layer: int = 1
    k: int = 4
    sr: float = 0.4
    rr: float = 0.5
    rr_semantics: str = "removed"
    beta: float = 5 / 9
    scoring_size: int = 512
    seed: int = 0
    out: str = ""

    def validate(self) -> "RunConfig":
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        if self.rr_semantics not in RR_SEMANTICS:
            raise ConfigError(f"rr_semantics must be one of {', '.join(RR_SEMANTICS)}")
        if not 0 <= self.sr <= 1 or not 0 <= self.rr <= 1:
            raise ConfigError("sr and rr must lie in [0, 1]")
        if self.beta < 0:
            raise ConfigError("beta must be non-negative")
        if self.method != "vanilla" and self.k < 1:
            raise ConfigError("k must be a positive integer")
        if self.scoring_size < 1:
            raise ConfigError("scoring_size must be positive")
        if any(h < 1 for h in self.hidden):
            raise ConfigError("hidden widths must be positive")
        if not 0 <= self.layer <= len(self.hidden):
            raise ConfigError(f"layer must lie in 0..{len(self.hidden)}")
        try:
            self.train_config()
            if not self.data:
                self.gen_params().validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def gen_params(self) -> GenParams:
        return GenParams(self.n, self.d, self.classes, self.group0_fraction,
                         self.noise0, self.noise1, self.separation, self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.learning_rate, self.lr_decay_every,
                           self.lr_decay_gamma, self.batch_size, self.seed)

    def resolved(self) -> dict:
        """Every field, in declaration order, with the values actually used."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = ",".join(map(str, v)) if f.name == "hidden" else v
        return out

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, value):
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = FIELD_TYPES[key]
    try:
        if key == "hidden":
            return _parse_hidden(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return parse_number(value)
        return str(value).strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = coerce(key, value)
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = coerce(key, value)
    return RunConfig(**values).validate()


def config_to_text(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.resolved().items())

