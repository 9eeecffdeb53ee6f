"""Plot data comparing the sampling and permutation distributions of the (un)studentized statistic.

For one process and sample size this writes kernel density estimates of the
observed statistic and of pooled permutation values, a QQ table of the
p-values, and the KS distance of each sample to N(0, 1).
"""
import argparse
import json
from pathlib import Path

import numpy as np

from studperm.harness import (
    TABLE_CONFIG,
    ExperimentSpec,
    figure_data,
    kde_curve,
    ks_distance,
    qq_pvalues,
    write_two_column_csv,
)
from studperm.processes import ProcessSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="m-dependent-product")
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--permutations", type=int, default=500)
    ap.add_argument("--test", choices=("studentized-perm", "unstudentized-perm", "cov-perm"), default="studentized-perm")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/null"))
    args = ap.parse_args()

    process = ProcessSpec(args.kind, m=args.m) if args.kind == "m-dependent-product" else ProcessSpec(args.kind, rho=0.5)
    spec = ExperimentSpec(process, (args.n,), args.reps, args.permutations, tests=(args.test,), seed=args.seed,
                          config=TABLE_CONFIG)
    data = figure_data(spec, args.n, args.test)
    args.out.mkdir(parents=True, exist_ok=True)
    grid = np.linspace(-5, 5, 501)
    for name in ("observed", "permutation"):
        write_two_column_csv(args.out / f"kde_{name}.csv", ("t", "density"), kde_curve(data[name], grid))
    write_two_column_csv(args.out / "qq_pvalues.csv", ("uniform_quantile", "p"), qq_pvalues(data["pvalues"]))
    summary = {
        "process": process.label,
        "n": args.n,
        "test": args.test,
        "ks_observed": ks_distance(data["observed"]),
        "ks_permutation": ks_distance(data["permutation"]),
        "rejection_at_0.05": float(np.mean(data["pvalues"] <= 0.05)),
    }
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
