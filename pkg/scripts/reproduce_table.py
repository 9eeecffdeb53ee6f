"""Rejection-probability tables for the m-dependent products, the AR(2) family and the autocovariance test.

    python scripts/reproduce_table.py table1 --scale desk --jobs 4 --out results/
"""
import argparse
import logging
import time
from pathlib import Path

from studperm.harness import PRESETS, SCALES, RejectionTable, preset_specs, rejection_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset", choices=sorted(PRESETS))
    ap.add_argument("--scale", choices=sorted(SCALES), default="desk")
    ap.add_argument("--sizes", type=lambda s: [int(v) for v in s.split(",")], default=None)
    ap.add_argument("--reps", type=int, default=None)
    ap.add_argument("--permutations", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    specs = preset_specs(args.preset, args.scale, args.seed, args.sizes, args.reps, args.permutations)
    table = RejectionTable(specs[0].sizes)
    for spec in specs:
        t0 = time.perf_counter()
        part = rejection_grid(spec, args.jobs)
        table.extend(part)
        table.meta = {**part.meta, "preset": args.preset, "scale": args.scale}
        logging.info("%s done in %.0fs", spec.process.label, time.perf_counter() - t0)

    args.out.mkdir(parents=True, exist_ok=True)
    stem = args.out / f"{args.preset}_{args.scale}"
    stem.with_suffix(".csv").write_text(table.to_csv())
    stem.with_suffix(".json").write_text(table.to_json() + "\n")
    print(table.to_csv(), end="")


if __name__ == "__main__":
    main()
