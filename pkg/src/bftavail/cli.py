"""Command-line entry point: ``bftavail <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version

from . import distributions
from .availability import scenario_availability, sweep_n, sweep_ratio
from .errors import DomainError, SolverError
from .model import SystemConfig, build_generator, build_scenario
from .plotscript import write_plot
from .simulation import SimConfig, simulate

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def write_manifest(path: str, command: str, params: dict, duration: float, outputs: list[str]) -> None:
    """Flat ``key = value`` manifest describing one run."""
    lines = [f"command = {command}", f"version = {_version()}"]
    lines += [f"param.{k} = {v}" for k, v in sorted(params.items())]
    lines.append(f"duration_seconds = {duration:.3f}")
    lines += [f"output = {p}" for p in outputs]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _manifest_path(args, primary: str | None) -> str | None:
    if args.manifest:
        return args.manifest
    if primary:
        return primary + ".manifest"
    return None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _config(args) -> SystemConfig:
    if args.ratio is not None:
        return SystemConfig.from_ratio(args.n, args.ratio)
    if args.xi is None:
        raise DomainError("give --ratio or --xi (with optional --eta)")
    return SystemConfig(args.n, args.xi, args.eta)


def _atomic_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    tmp = path + ".partial"
    try:
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _table_csv(path: str, table) -> None:
    rows = [[str(n), *map(fmt, vals)] for n, vals in table.rows]
    _atomic_csv(path, ["N", *table.columns], rows)


def cmd_solve(args) -> int:
    config = _config(args)
    if args.solver == "both":
        a = scenario_availability(config, args.f, "svd").availability
        b = scenario_availability(config, args.f, "replaced").availability
        print(f"availability[svd]      = {fmt(a)}")
        print(f"availability[replaced] = {fmt(b)}")
        print(f"difference             = {a - b:.3e}")
        value = a
    else:
        value = scenario_availability(config, args.f, args.solver).availability
        print(f"availability = {fmt(value)}")
    outputs = []
    if args.csv:
        _atomic_csv(args.csv, ["N", "f", "h", "xi", "eta", "availability"],
                    [[str(config.n_servers), str(args.f), str(config.n_servers - args.f),
                      fmt(config.breakdown_rate), fmt(config.repair_rate), fmt(value)]])
        outputs.append(args.csv)
    if args.export_generator:
        q = build_generator(build_scenario(config, args.f))
        with open(args.export_generator, "w") as fh:
            q.write_triplets(fh)
        outputs.append(args.export_generator)
    return _finish(args, outputs[0] if outputs else None, outputs)


def _solver_arg(name):
    return None if name == "auto" else name


def cmd_sweep(args) -> int:
    names = _names(args.dists)
    if not names:
        raise DomainError("--dists is empty")
    for name in names:
        if name not in distributions.PRESETS:
            raise DomainError(f"unknown preset {name!r}; choose from {sorted(distributions.PRESETS)}")
    if args.n_min > args.n_max:
        raise DomainError("--n-min exceeds --n-max")
    factories = {
        name: (lambda n, name=name: distributions.paper_preset(name, n, args.rounding))
        for name in names
    }
    table = sweep_n(range(args.n_min, args.n_max + 1), args.ratio, factories,
                    _solver_arg(args.solver), args.jobs)
    _table_csv(args.out, table)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return _finish(args, args.out, [args.out])


def cmd_ratio_sweep(args) -> int:
    if args.dist not in distributions.PRESETS:
        raise DomainError(f"unknown preset {args.dist!r}")
    if args.n_min > args.n_max:
        raise DomainError("--n-min exceeds --n-max")
    table = sweep_ratio(range(args.n_min, args.n_max + 1), args.ratios,
                        lambda n: distributions.paper_preset(args.dist, n, args.rounding),
                        _solver_arg(args.solver), args.jobs)
    _table_csv(args.out, table)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return _finish(args, args.out, [args.out])


def cmd_simulate(args) -> int:
    config = _config(args)
    scenario = build_scenario(config, args.f)
    est = simulate(SimConfig(scenario, args.horizon, args.warmup, args.seed, args.reps))
    exact = scenario_availability(config, args.f).availability
    z = (est.mean_availability - exact) / est.standard_error if est.standard_error > 0 else math.nan
    print(f"simulated = {fmt(est.mean_availability)} +/- {est.standard_error:.3e} (SE, {args.reps} reps)")
    print(f"analytic  = {fmt(exact)}")
    print(f"z         = {z:.3f}")
    outputs = []
    if args.csv:
        _atomic_csv(args.csv, ["replication", "availability"],
                    [[str(k), fmt(v)] for k, v in enumerate(est.replication_values)])
        outputs.append(args.csv)
    return _finish(args, outputs[0] if outputs else None, outputs)


def cmd_plot(args) -> int:
    write_plot(args.csv, args.out, args.title, args.ymax)
    print(f"wrote {args.out}")
    return _finish(args, args.out, [args.out])


def _finish(args, primary, outputs) -> int:
    path = _manifest_path(args, primary)
    if path:
        params = {k: v for k, v in vars(args).items() if k not in ("handler", "manifest", "_start")}
        write_manifest(path, args.command, params, time.perf_counter() - args._start, outputs)
    return 0


def _add_rates(p, need_f=True):
    p.add_argument("--n", type=int, required=True, help="cluster size N")
    if need_f:
        p.add_argument("--f", type=int, required=True, help="number of Byzantine nodes")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ratio", type=float, help="xi/eta with eta fixed at 1")
    g.add_argument("--xi", type=float, help="per-node breakdown rate")
    p.add_argument("--eta", type=float, default=1.0, help="repair rate (with --xi)")


def _add_sweep_common(p):
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=128)
    p.add_argument("--out", required=True)
    p.add_argument("--solver", choices=("auto", "svd", "replaced"), default="auto")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--rounding", choices=("floor", "round"), default="floor",
                   help="integer location of degenerate presets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bftavail", description=__doc__.splitlines()[0])
    parser.add_argument("--manifest", help="manifest path (default: <output>.manifest)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="availability of one (N, f) scenario")
    _add_rates(p)
    p.add_argument("--solver", choices=("svd", "replaced", "both"), default="svd")
    p.add_argument("--csv")
    p.add_argument("--export-generator", metavar="PATH", help="write Q as 'row col value' triplets")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("sweep", help="mean availability over N for several distributions")
    p.add_argument("--ratio", type=float, default=0.015)
    p.add_argument("--dists", default="fig3_uniform,fig3_poisson,fig3_binomial,fig3_degenerate")
    _add_sweep_common(p)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("ratio-sweep", help="mean availability over N for several xi/eta")
    p.add_argument("--ratios", type=_floats, default=[0.01, 0.015, 0.02])
    p.add_argument("--dist", default="fig3_degenerate")
    _add_sweep_common(p)
    p.set_defaults(handler=cmd_ratio_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of A_{h,f}")
    _add_rates(p)
    p.add_argument("--horizon", type=float, default=1e5)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("plot", help="gnuplot script for a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--ymax", type=float, default=None)
    p.set_defaults(handler=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._start = time.perf_counter()
    try:
        return args.handler(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
