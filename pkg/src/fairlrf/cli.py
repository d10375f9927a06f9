"""Command-line entry point: ``fairlrf {gen-data,train,run,sweep,inspect}``.

Every ``RunConfig`` key is also a flag (``--learning-rate`` or
``--learning_rate``); flags override values read from ``--config``. On
failure a single JSON line ``{"error": <type>, "message": <text>}`` goes to
stderr and the exit status is 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields

from . import __version__, datagen, fileio
from .config import RunConfig, config_to_text, load_config
from .errors import ConfigError, FairLRFError, FormatError
from .metrics import format_table, read_report_csv
from .network import FactoredLayer
from .pipeline import SWEEP_AXES, evaluate, method_label, prepare, run, sweep

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    for f in fields(RunConfig):
        names = [f"--{f.name.replace('_', '-')}"]
        if "_" in f.name:
            names.append(f"--{f.name}")
        p.add_argument(*names, dest=f.name, default=None, metavar=f.name.upper())
    p.add_argument("-v", "--verbose", action="store_true")


def _config(args) -> RunConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    return load_config(args.config, overrides)


def cmd_gen_data(args) -> None:
    cfg = _config(args)
    path = cfg.out or "data.csv"
    if os.path.isdir(path):
        path = os.path.join(path, "data.csv")
    ds = datagen.generate(cfg.gen_params())
    datagen.write_csv(ds, path)
    print(f"wrote {len(ds)} samples to {path}")


def cmd_train(args) -> None:
    cfg = _config(args)
    if not cfg.out:
        raise ConfigError("train needs --out")
    prep = prepare(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "model.flrw")
    fileio.save_network(prep.base, path)
    with open(os.path.join(cfg.out, "config.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_to_text(cfg))
    report = evaluate(prep.base, prep.base, prep.data, cfg.replace(method="vanilla"))
    print(format_table([("Vanilla", report)]), end="")
    print(f"wrote {path}")


def cmd_run(args) -> None:
    cfg = _config(args)
    report = run(cfg)
    print(format_table([(method_label(cfg.method), report)]), end="")
    if cfg.out:
        print(f"wrote {cfg.out}")


def cmd_sweep(args) -> None:
    cfg = _config(args)
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values needs at least one value")
    reports = sweep(cfg, args.axis, values)
    for v, r in zip(values, reports):
        print(f"{args.axis}={v}  precision_avg={r.prf.avg('precision'):.4f}  "
              f"eopp1={r.eopp1:.4f}  eodd={r.eodd:.4f}  C.R.={r.compression_rate:.4f}")


def _inspect_network(path) -> str:
    net = fileio.load_network(path)
    out = [f"{path}: {len(net.layers)} layers, {net.class_count} classes"]
    for i, layer in enumerate(net.layers):
        if isinstance(layer, FactoredLayer):
            out.append(f"  [{i}] factored {layer.d_in}x{layer.d_out} k={layer.k} "
                       f"act={layer.activation} zeroed={layer.zeroed_count}")
        else:
            out.append(f"  [{i}] dense {layer.d_in}x{layer.d_out} act={layer.activation}")
    return "\n".join(out)


def cmd_inspect(args) -> None:
    path = args.path
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == fileio.MAGIC:
        print(_inspect_network(path))
    elif magic == fileio.MATRIX_MAGIC:
        m = fileio.load_matrix(path)
        print(f"{path}: {m.shape[0]}x{m.shape[1]} min={float(m.min())!r} max={float(m.max())!r} mean={float(m.mean())!r}")
    elif path.endswith(".csv"):
        with open(path, encoding="utf-8") as fh:
            rows = read_report_csv(fh.read())
        keys = ["method", "strategy", "sr", "rr", "beta", "precision_avg", "eopp1", "eodd", "compression_rate"]
        for row in rows:
            print("  ".join(f"{k}={row.get(k, '')}" for k in keys))
    else:
        raise FormatError(f"{path}: not a weight, matrix or report file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairlrf", description="Fairness-aware low-rank compression experiments")
    parser.add_argument("--version", action="version", version=f"fairlrf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("gen-data", cmd_gen_data, "write a synthetic dataset CSV"),
        ("train", cmd_train, "pre-train a model and save model.flrw"),
        ("run", cmd_run, "run one method and write its report"),
        ("sweep", cmd_sweep, "run one method over a list of values of one setting"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        if name == "sweep":
            p.add_argument("--axis", required=True, choices=SWEEP_AXES)
            p.add_argument("--values", required=True, help="comma-separated values")
        p.set_defaults(func=fn)
    p = sub.add_parser("inspect", help="summarise a .flrw, .flrm or report .csv file")
    p.add_argument("path")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (FairLRFError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
