"""Command line: run, sweep, fit, verify, gen."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..bitcore import RandomSource
from ..features import ConfigurationError, format_graph
from ..oracles import BOUND_IDS
from ..problems import CoverageInstance, format_coverage, random_connected_graph
from .config import build_point, load_config
from .experiments import verify_suite
from .fitting import MAX_SPREAD, MIN_RANGE, MIN_REPLICATIONS, fit_scaling
from .sweep import read_csv, run_point, run_sweep


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    n = args.n if args.n is not None else cfg.grid[0]
    if n not in cfg.grid:
        raise ConfigurationError(f"n={n} is not in the config grid {cfg.grid}")
    gi = cfg.grid.index(n)
    point = build_point(cfg, n, gi)
    rec = run_point(point, cfg.master_seed, cfg.stream(gi, args.rep), cfg.config_id, cfg.timing)
    print(rec.to_json(full=args.full))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    out = args.output or cfg.output
    if out is None:
        raise ConfigurationError("no output path: set 'output' in the config or pass --output")
    records = run_sweep(cfg, out)
    print(f"wrote {len(records)} rows to {out}", file=sys.stderr)
    return 0


def _cmd_fit(args) -> int:
    records = read_csv(args.csv)
    if args.config_id:
        records = [r for r in records if r.config_id == args.config_id]
    slope = tuple(args.slope) if args.slope else None
    fit = fit_scaling(
        records,
        args.bound_id,
        args.metric,
        r=args.r,
        w_max=args.w_max,
        max_spread=args.max_spread,
        min_range=args.min_range,
        slope_range=slope,
        min_replications=args.min_replications,
    )
    print(fit.to_json())
    print(fit.table(), file=sys.stderr)
    return 0 if fit.verdict else 1


def _cmd_verify(args) -> int:
    report = verify_suite(args.level, only=args.only, workers=args.workers, echo=print)
    print(report.summary())
    return 0 if report.passed else 1


def _cmd_gen(args) -> int:
    rng = RandomSource(args.seed, 0)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        if args.kind == "coverage":
            inst = CoverageInstance.random(args.n, args.universe, args.r, rng)
            path = out / f"coverage_{i:03d}.txt"
            path.write_text(format_coverage(inst))
        else:
            m = args.m if args.m is not None else 2 * args.n
            g = random_connected_graph(args.n, m, rng)
            path = out / f"graph_{i:03d}.txt"
            path.write_text(format_graph(g))
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdlab", description="MAP-Elites runtime experiments on pseudo-Boolean problems.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="one run of a config, printed as JSON")
    s.add_argument("config")
    s.add_argument("--n", type=int, help="grid point (default: first)")
    s.add_argument("--rep", type=int, default=0, help="replication index")
    s.add_argument("--full", action="store_true", help="include per-cell first-cover traces")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="replicated runs over the n-grid, written as CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("--workers", type=int, help="process count, 0 for all cores")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("fit", help="ratio and slope of mean hitting times against a bound")
    s.add_argument("csv")
    s.add_argument("bound_id", choices=BOUND_IDS)
    s.add_argument("--metric", default="t_cover", choices=("t_cover", "t_opt", "t_copt", "t_approx"))
    s.add_argument("--config-id")
    s.add_argument("--r", type=int, help="cardinality constraint for the submod bound")
    s.add_argument("--w-max", type=float, help="largest edge weight for mst_zero (default m)")
    s.add_argument("--max-spread", type=float, default=MAX_SPREAD)
    s.add_argument("--min-range", type=float, default=MIN_RANGE)
    s.add_argument("--min-replications", type=int, default=MIN_REPLICATIONS)
    s.add_argument("--slope", type=float, nargs=2, metavar=("LO", "HI"), help="also require slope in [LO, HI]")
    s.set_defaults(func=_cmd_fit)

    s = sub.add_parser("verify", help="oracle checks (fast) or every acceptance criterion (full)")
    s.add_argument("--level", choices=("fast", "full"), default="fast")
    s.add_argument("--only", nargs="+", help="subset of check names, e.g. E1 P2")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("gen", help="write random coverage instances or graphs")
    s.add_argument("kind", choices=("coverage", "graph"))
    s.add_argument("-o", "--output", required=True, help="directory")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--n", type=int, required=True, help="sets (coverage) or nodes (graph)")
    s.add_argument("--universe", type=int, default=40)
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--m", type=int, help="edges (default 2n)")
    s.add_argument("--seed", type=int, default=1)
    s.set_defaults(func=_cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
