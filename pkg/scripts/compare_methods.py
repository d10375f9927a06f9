"""Compare vanilla, truncated SVD, SLR-w, SLR-a and FairLRF over several seeds.

Every method for a seed shares one pre-trained model. FairLRF's beta is
picked on the validation split; the table reports test metrics averaged
over seeds.

    python3 scripts/compare_methods.py --seeds 0 1 2 3 4 --out results/compare
"""

import argparse
import os
import warnings

import numpy as np

from fairlrf import pipeline
from fairlrf.config import load_config
from fairlrf.metrics import format_table, reports_to_csv

METHODS = ("vanilla", "truncated", "slr_w", "slr_a", "fairlrf")
BETAS = (1 / 3, 5 / 9, 1.0)


def compare_seed(cfg):
    prep = pipeline.prepare(cfg)
    out = {}
    for method in METHODS:
        if method == "fairlrf":
            cands = [pipeline.run(cfg.replace(method=method, beta=b), prep) for b in BETAS]
            out[method] = pipeline.select_best(cands, out["truncated"])
        else:
            out[method] = pipeline.run(cfg.replace(method=method), prep)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--out", default="")
    args = ap.parse_args()
    base = load_config(args.config)
    per_seed = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in args.seeds:
            per_seed.append(compare_seed(base.replace(seed=seed)))
            print(f"seed {seed} done", flush=True)
    for method in METHODS:
        eopp = [r[method].eopp1 for r in per_seed]
        prec = [r[method].prf.avg("precision") for r in per_seed]
        cr = per_seed[0][method].compression_rate
        print(f"{pipeline.method_label(method):<14} EOpp median {np.median(eopp):.4f} mean {np.mean(eopp):.4f}  "
              f"precision median {np.median(prec):.4f}  C.R. {cr:.3f}x")
    print()
    print(format_table([(pipeline.method_label(m), per_seed[0][m]) for m in METHODS]), end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        reports = [r[m] for r in per_seed for m in METHODS]
        with open(os.path.join(args.out, "compare.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(reports_to_csv(reports, pipeline.header_lines(base)))
        print(f"wrote {os.path.join(args.out, 'compare.csv')}")


if __name__ == "__main__":
    main()
