"""Multi-lag studentized permutation test on daily log returns.

Pass one or more price CSVs (Date, Close columns). Without arguments a
synthetic random-walk price file is generated so the pipeline can be run
end to end offline.
"""
import argparse
import tempfile
from pathlib import Path

import numpy as np

from studperm.dataio import PriceHistory, load_prices, log_returns, portmanteau_pipeline, write_prices
from studperm.permutation import MONTE_CARLO, PermutationScheme


def synthetic_prices(directory: Path, n: int = 2500, seed: int = 0) -> Path:
    g = np.random.default_rng(seed)
    closes = 1000 * np.exp(np.cumsum(g.standard_t(5, n + 1) * 0.01))
    dates = tuple(str(np.datetime64("2010-01-04") + i) for i in range(n + 1))
    path = directory / "synthetic.csv"
    write_prices(PriceHistory(dates, closes), path)
    return path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="*", type=Path)
    ap.add_argument("--lags", type=int, default=10)
    ap.add_argument("--permutations", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--correction", choices=("bonferroni", "holm", "sidak"), default="bonferroni")
    args = ap.parse_args()

    files = args.files or [synthetic_prices(Path(tempfile.mkdtemp()))]
    scheme = PermutationScheme(MONTE_CARLO, args.permutations, args.seed)
    print("k," + ",".join(str(k) for k in range(1, args.lags + 1)) + ",verdict,ljung-box p")
    for path in files:
        report = portmanteau_pipeline(log_returns(load_prices(path)), args.lags, scheme, correction=args.correction)
        row = report.to_csv(path.stem).splitlines()[1]
        verdict = "reject" if report.portmanteau.global_reject else "accept"
        print(f"{row},{verdict},{report.ljung_box['p']:.4f}")


if __name__ == "__main__":
    main()
