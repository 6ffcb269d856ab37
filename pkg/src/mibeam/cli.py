"""Command line entry point: ``mibeam <subcommand> [options]``."""

import argparse
import sys

import numpy as np

from . import experiments as ex
from .errors import MIBeamError
from .oracle import OracleConfig

QUICK_CONSTELLATIONS = 100

# kind -> (receivers, F grid, constellations)
_DEFAULTS = {
    "pattern": (1, list(ex.PATTERN_F_GRID), 1000),
    "priority": (2, None, 1000),
    "efficiency-sweep": (5, None, 1000),
    "oracle-check": (3, [10.0], 50),
}


def parse_f(text):
    """``"0.1,1,10"`` (explicit list) or ``"lo:hi:n"`` (n log-spaced points)."""
    text = text.strip()
    if ":" in text:
        lo, hi, n = text.split(":")
        return ex.default_f_grid(int(n), float(lo), float(hi))
    return [float(v) for v in text.split(",") if v.strip()]


def parse_priorities(text):
    sep = ":" if ":" in text else ","
    return [float(v) for v in text.split(sep)]


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--receivers", type=int, help="number of receivers K")
    p.add_argument("--f", dest="f_values", type=parse_f,
                   help="coupling factors: list '0.1,1,10' or log range 'lo:hi:n'")
    p.add_argument("--constellations", type=int, help="random constellations per F")
    p.add_argument("--priorities", type=parse_priorities,
                   help="receiver priorities, e.g. '2:1'")
    p.add_argument("--load", default="matched",
                   help="'matched' (R*sqrt(1+F^2)) or a fixed load in ohms")
    p.add_argument("--out", help="write CSV here")
    p.add_argument("--quick", action="store_true",
                   help=f"use {QUICK_CONSTELLATIONS} constellations (10 for oracle-check)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--min-gain", type=float, default=1e-6)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mibeam",
        description="Beamforming experiments for 3-coil magnetic-induction power transfer.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind, text in (("pattern", "mean angular efficiency pattern, one receiver"),
                       ("priority", "two receivers under different priorities"),
                       ("efficiency-sweep", "mean efficiency of all methods versus F"),
                       ("oracle-check", "iterative method against brute-force search")):
        p = sub.add_parser(kind, help=text)
        _add_common(p)
        if kind == "oracle-check":
            p.add_argument("--restarts", type=int, default=10,
                           help="random restarts of the brute-force search")
    p = sub.add_parser("solve", help="inspect one scene from a scenario file")
    p.add_argument("scenario", help="JSON scenario file")
    p.add_argument("--oracle", action="store_true", help="also run the brute-force search")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--out", help="write per-method CSV here")
    return parser


def spec_from_args(args):
    receivers, grid, count = _DEFAULTS[args.command]
    if args.quick:
        count = 10 if args.command == "oracle-check" else QUICK_CONSTELLATIONS
    kwargs = dict(
        kind=args.command,
        n_receivers=args.receivers or receivers,
        constellations=args.constellations or count,
        priorities=args.priorities,
        master_seed=args.seed,
        load_policy=args.load,
        output_path=args.out,
        max_iters=args.max_iters,
        min_gain=args.min_gain,
        workers=args.workers,
    )
    f_values = args.f_values or grid
    if f_values is not None:
        kwargs["f_values"] = f_values
    if args.command == "oracle-check":
        kwargs["oracle_restarts"] = args.restarts
    return ex.ExperimentSpec(**kwargs)


def _report(record, out):
    if record.kind == "efficiency-sweep":
        out.write("F          uniform   closest   eigen     iterative  gain_abs  gain_rel\n")
        for row in ex.gain_table(record):
            out.write(f"{row['F']:<10.4g} {row['uniform']:.4f}    {row['closest-neighbor']:.4f}"
                      f"    {row['eigen']:.4f}    {row['iterative']:.4f}     "
                      f"{row['abs_gain']:+.4f}   {100 * row['rel_gain']:+.1f}%\n")
    elif record.kind == "priority":
        stats = ex.summarize(record)
        for (F, method), s in sorted(stats.items()):
            rx = ", ".join(f"{v:.4f}" for v in s["rx_mean"])
            out.write(f"F={F:<10.4g} {method:<18} mean Rx efficiencies [{rx}]\n")
    elif record.kind == "pattern":
        for F in sorted({r[0] for r in record.rows}):
            for method in ("uniform", "optimized"):
                peaks = ex.pattern_peaks(record, F, method)
                out.write(f"F={F:<8.4g} {method:<10} largest local maxima at "
                          f"{', '.join(f'{a:g} deg' for a in peaks)}\n")
    elif record.kind == "oracle-check":
        gaps = np.array(record.column("gap"))
        out.write(f"scenes: {len(gaps)}  mean gap {gaps.mean():.5f}  max gap {gaps.max():.5f}"
                  f"  min gap {gaps.min():.2e}  scenes with gap > 0.02: "
                  f"{int(np.sum(gaps > 0.02))}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            record, text = ex.run_solve(args.scenario, oracle=args.oracle,
                                        oracle_config=OracleConfig(restarts=args.restarts))
            print(text)
            if args.out:
                record.to_csv(args.out)
            return 0
        record = ex.run(spec_from_args(args))
    except (MIBeamError, ValueError, OSError) as exc:
        print(f"mibeam: error: {exc}", file=sys.stderr)
        return 2
    _report(record, sys.stdout)
    if args.out:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
