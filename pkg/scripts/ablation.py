"""Ablation sweeps of FairLRF over sr, rr, beta and the target layer.

Each axis is swept on one shared pre-trained model per seed; sweep.csv and
plotdata_<metric>.csv land in <out>/<axis>_seed<seed>/.

    python3 scripts/ablation.py --out results/ablation --seeds 0 1
"""

import argparse
import os
import warnings

import numpy as np

from fairlrf import pipeline
from fairlrf.config import load_config

AXES = {
    "sr": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    "rr": [0.0, 0.25, 0.5, 0.75, 1.0],
    "beta": [0.0, 1 / 3, 5 / 9, 1.0, 2.0, 5.0],
    "layer": [0, 1, 2],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--axes", nargs="+", default=list(AXES), choices=list(AXES))
    ap.add_argument("--out", default="results/ablation")
    args = ap.parse_args()
    base = load_config(args.config)
    for axis in args.axes:
        table = []
        for seed in args.seeds:
            cfg = base.replace(seed=seed, out=os.path.join(args.out, f"{axis}_seed{seed}"))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                reports = pipeline.sweep(cfg, axis, AXES[axis])
            table.append([(r.prf.avg("precision"), r.eopp1, r.eodd) for r in reports])
        mean = np.mean(np.array(table), axis=0)
        print(f"\n{axis}: mean over seeds {args.seeds}")
        print(f"{axis:>8} {'precision':>10} {'EOpp':>8} {'EOdd':>8}")
        for value, (p, e, o) in zip(AXES[axis], mean):
            print(f"{value:>8.3f} {p:>10.4f} {e:>8.4f} {o:>8.4f}")


if __name__ == "__main__":
    main()
