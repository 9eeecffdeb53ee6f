"""Command-line entry point: ``studperm <subcommand> [flags]``.

Exit status is 0 on success, 2 on a usage error and 1 on a data or domain
error (with a one-line diagnostic on stderr).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import harness
from .dataio import load_prices, load_series, log_returns, portmanteau_pipeline
from .errors import DataError, DomainError
from .permutation import FULL, MONTE_CARLO, PermutationScheme, permutation_distribution, randomized_test
from .processes import KINDS, LAWS, ProcessSpec, dumps_config, loads_config
from .rng import entropy_seed, substream
from .studentizer import StudentizerConfig, TruncationRule, make_statistic


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be a positive integer")
    return v


def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must lie in (0, 1)")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _bn_rule(text: str) -> TruncationRule:
    try:
        return TruncationRule.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated list of numbers") from None


def _int_list(text: str) -> list[int]:
    vals = _float_list(text)
    if any(v != int(v) or v < 3 for v in vals):
        raise argparse.ArgumentTypeError(f"{text!r}: sizes must be integers >= 3")
    return [int(v) for v in vals]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_seed, help="master seed (drawn and printed to stderr when omitted)")
    p.add_argument("--alpha", type=_unit_interval, default=0.05)
    p.add_argument("--permutations", "-B", type=_positive_int, default=None, help="sampled permutations (default 2000)")
    p.add_argument("--bn-rule", type=_bn_rule, default=TruncationRule(), help="cbrt | fixed:<b> | power:<p>")
    p.add_argument("--epsilon", type=_positive_float, default=1e-6)
    p.add_argument("--n-min", type=_positive_int, default=20)
    p.add_argument("--sided", choices=harness.SIDES, default=None)
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--config", type=Path, help="key = value process/seed config file")
    return p


def _process_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("process")
    g.add_argument("--kind", choices=KINDS)
    g.add_argument("--m", type=int)
    g.add_argument("--power", type=int)
    g.add_argument("--phi", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--h", dest="h_param", type=float)
    g.add_argument("--ar", type=_float_list)
    g.add_argument("--ma", type=_float_list)
    g.add_argument("--innovation", choices=LAWS)
    g.add_argument("--df", type=float)
    g.add_argument("--burn-in", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="studperm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("test", parents=[common], help="single-lag permutation test of a series")
    p.add_argument("--input", type=Path, required=True, help="CSV holding the series")
    p.add_argument("--column", help="column name (default: first column)")
    p.add_argument("--lag", type=_positive_int, default=1)
    p.add_argument("--method", choices=("studentized", "unstudentized", "cov"), default="studentized")
    p.add_argument("--mode", choices=(MONTE_CARLO, FULL), default=MONTE_CARLO)

    p = sub.add_parser("portmanteau", parents=[common], help="multi-lag permutation portmanteau test")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--input-kind", choices=("prices", "series"), default="prices")
    p.add_argument("--date-column", default="Date")
    p.add_argument("--price-column", default="Close")
    p.add_argument("--column", help="series column when --input-kind series")
    p.add_argument("--lags", type=_positive_int, default=10)
    p.add_argument("--correction", choices=("bonferroni", "sidak", "holm"), default="bonferroni")
    p.add_argument("--label", default=None, help="row label in CSV output")

    p = sub.add_parser("simulate", parents=[common], help="simulate a process")
    _process_flags(p)
    p.add_argument("-n", type=_positive_int, required=True)

    p = sub.add_parser("mc-table", parents=[common], help="Monte Carlo rejection-probability table")
    p.add_argument("--preset", choices=sorted(harness.PRESETS))
    p.add_argument("--scale", choices=sorted(harness.SCALES), default="desk")
    _process_flags(p)
    p.add_argument("--tests", type=lambda s: s.split(","), default=None,
                   help="comma-separated subset of " + ",".join(harness.TEST_NAMES))
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--reps", type=_positive_int, default=None)
    p.add_argument("--curves-dir", type=Path, help="also write KDE and QQ plot data for the first row")

    p = sub.add_parser("power-curve", parents=[common], help="local power along AR(1) alternatives")
    p.add_argument("--preset", choices=("figure4",))
    p.add_argument("--scale", choices=sorted(harness.SCALES), default="desk")
    p.add_argument("--hs", type=_float_list, default=None, help="comma-separated h values")
    p.add_argument("--sizes", type=_int_list, default=None)
    p.add_argument("--reps", type=_positive_int, default=None)

    p = sub.add_parser("returns", parents=[common], help="log returns of a price CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--date-column", default="Date")
    p.add_argument("--price-column", default="Close")
    return parser


def _read_config(args) -> tuple[Optional[ProcessSpec], Optional[int]]:
    if args.config is None:
        return None, None
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {args.config}: {exc.strerror}") from None
    return loads_config(text)


def _resolve_seed(args) -> int:
    seed = args.seed
    if seed is None:
        seed = _read_config(args)[1]
    if seed is None:
        seed = entropy_seed()
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def _config(args) -> StudentizerConfig:
    return StudentizerConfig(getattr(args, "lag", 1), args.bn_rule, args.epsilon, args.n_min)


_PROCESS_FIELDS = {"kind": "kind", "m": "m", "power": "power", "phi": "phi", "rho": "rho", "h_param": "h",
                   "ar": "ar", "ma": "ma", "innovation": "innovation", "df": "df", "burn_in": "burn_in"}


def _process(args, parser, required: bool) -> Optional[ProcessSpec]:
    base = {}
    spec, _ = _read_config(args)
    if spec is not None:
        base = {f: getattr(spec, f) for f in _PROCESS_FIELDS.values()}
    flags = {dst: getattr(args, src) for src, dst in _PROCESS_FIELDS.items() if getattr(args, src) is not None}
    if not base and not flags:
        if required:
            parser.error("a process is required: give --kind ... or --config")
        return None
    return ProcessSpec(**{**base, **flags})


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_test(args, parser) -> None:
    x = load_series(args.input, args.column)
    if args.lag > x.n - 2:
        raise DomainError(f"lag {args.lag} too large for a series of length {x.n}")
    seed = _resolve_seed(args)
    scheme = PermutationScheme(args.mode, args.permutations or 2000, seed)
    stat = make_statistic(args.method, args.lag, _config(args))
    dist = permutation_distribution(x, stat, scheme)
    res = randomized_test(dist, float(dist.values[0]), args.alpha)
    out = {"method": args.method, "lag": args.lag, "n": x.n, "seed": seed, "B": scheme.B, **res.to_dict()}
    _emit(args, json.dumps(out, indent=2))


def _cmd_portmanteau(args, parser) -> None:
    if args.input_kind == "prices":
        returns = log_returns(load_prices(args.input, args.date_column, args.price_column))
    else:
        returns = load_series(args.input, args.column)
    seed = _resolve_seed(args)
    scheme = PermutationScheme(MONTE_CARLO, args.permutations or 2000, seed)
    report = portmanteau_pipeline(returns, args.lags, scheme, _config(args), args.correction,
                                  args.alpha, args.sided or "two-sided")
    if args.format == "csv":
        _emit(args, report.to_csv(args.label or args.input.stem))
    else:
        _emit(args, report.to_json())


def _cmd_simulate(args, parser) -> None:
    spec = _process(args, parser, required=True)
    seed = _resolve_seed(args)
    x = spec.generate(args.n, substream(seed))
    if args.format == "json":
        _emit(args, json.dumps({"process": dumps_config(spec), "seed": seed, "n": args.n, "values": x.tolist()}, indent=2))
    else:
        _emit(args, "x\n" + "\n".join(repr(float(v)) for v in x))


def _cmd_mc_table(args, parser) -> None:
    spec_proc = _process(args, parser, required=False)
    if args.preset and spec_proc is not None:
        parser.error("--preset conflicts with process flags / --config")
    if not args.preset and spec_proc is None:
        parser.error("give --preset or a process (--kind ... / --config)")
    seed = _resolve_seed(args)
    if args.preset:
        if args.tests:
            parser.error("--tests cannot be combined with --preset")
        specs = harness.preset_specs(args.preset, args.scale, seed, args.sizes, args.reps, args.permutations)
        if args.sided:
            specs = [replace(s, sided=args.sided) for s in specs]
    else:
        R, B = harness.SCALES[args.scale]
        specs = [harness.ExperimentSpec(
            spec_proc, tuple(args.sizes or harness.PAPER_SIZES), args.reps or R, args.permutations or B,
            args.alpha, tuple(args.tests or ("studentized-perm",)), seed,
            args.sided or "one-sided-greater", _config(args),
        )]
    table = harness.RejectionTable(specs[0].sizes)
    for spec in specs:
        part = harness.rejection_grid(spec, args.jobs)
        table.extend(part)
        table.meta = {**part.meta, "preset": args.preset}
    if args.curves_dir:
        _write_curves(args.curves_dir, specs[0])
    _emit(args, table.to_json() if args.format == "json" else table.to_csv())


def _write_curves(directory: Path, spec: harness.ExperimentSpec) -> None:
    import numpy as np

    directory.mkdir(parents=True, exist_ok=True)
    test = next((t for t in spec.tests if t in ("studentized-perm", "unstudentized-perm", "cov-perm")), None)
    if test is None:
        raise DomainError("curve data needs a permutation test")
    n = max(spec.sizes)
    data = harness.figure_data(spec, n, test)
    grid = np.linspace(-4, 4, 401)
    for name in ("observed", "permutation"):
        if data[name].size >= 2:
            harness.write_two_column_csv(directory / f"kde_{name}.csv", ("t", "density"),
                                         harness.kde_curve(data[name], grid))
    harness.write_two_column_csv(directory / "qq_pvalues.csv", ("uniform_quantile", "p"),
                                 harness.qq_pvalues(data["pvalues"]))


def _cmd_power_curve(args, parser) -> None:
    seed = _resolve_seed(args)
    R, B = harness.SCALES[args.scale]
    R, B = args.reps or R, args.permutations or B
    if args.preset == "figure4":
        hs = args.hs or list(harness.FIGURE4_H)
        sizes = args.sizes or list(harness.FIGURE4_SIZES)
    else:
        if not args.hs or not args.sizes:
            parser.error("give --preset figure4 or both --hs and --sizes")
        hs, sizes = args.hs, args.sizes
    cfg = _config(args)
    rows = []
    for n in sizes:
        for pt in harness.local_power_curve(hs, n, R, B, args.alpha, seed, args.jobs, cfg):
            rows.append({"n": n, "h": pt.h, "rejection": pt.rejection, "se": pt.se,
                         "target": harness.local_power_target(pt.h, args.alpha)})
    if args.format == "json":
        _emit(args, json.dumps({"R": R, "B": B, "alpha": args.alpha, "seed": seed, "points": rows}, indent=2))
    elif len(sizes) == 1:
        _emit(args, "h,rejection\n" + "\n".join(f"{r['h']!r},{r['rejection']!r}" for r in rows))
    else:
        _emit(args, "n,h,rejection\n" + "\n".join(f"{r['n']},{r['h']!r},{r['rejection']!r}" for r in rows))


def _cmd_returns(args, parser) -> None:
    ret = log_returns(load_prices(args.input, args.date_column, args.price_column))
    if args.format == "json":
        _emit(args, json.dumps({"dates": list(ret.dates), "returns": ret.series.values.tolist(),
                                "dropped_rows": ret.dropped}, indent=2))
    else:
        _emit(args, "date,return\n" + "\n".join(f"{d},{v!r}" for d, v in zip(ret.dates, ret.series.values.tolist())))


COMMANDS = {
    "test": _cmd_test,
    "portmanteau": _cmd_portmanteau,
    "simulate": _cmd_simulate,
    "mc-table": _cmd_mc_table,
    "power-curve": _cmd_power_curve,
    "returns": _cmd_returns,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
