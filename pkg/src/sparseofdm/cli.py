"""Command line entry point: ``simulate``, ``analyze`` and ``plot``."""
import argparse
import dataclasses
import logging
import math
import sys

import numpy as np

from . import analysis
from .harness import ConfigError, ExperimentConfig, load_config, sweep, write_csv


def _simulate(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    out = args.out or config.output
    metrics = sweep(config, workers=args.workers)
    write_csv(metrics, out)
    print(f"wrote {len(metrics)} rows to {out}")
    return 0


def _fmt(x):
    return "-" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6g}"


def _analyze(args):
    stats = analysis.TapStatistics(sigma_tap2=args.sigma_tap2, sigma_n2=args.sigma_n2, p_tap=args.p_tap)
    rows = analysis.report(stats, n_draws=args.draws, rng=np.random.default_rng(args.seed))
    width = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{width}}  {'closed form':>14}  {'monte carlo':>14}")
    for name, closed, mc in rows:
        print(f"{name:<{width}}  {_fmt(closed):>14}  {_fmt(mc):>14}")
    return 0


def _plot(args):
    from .plotting import plot_csv

    plot_csv(args.inp, args.out, metric=args.metric)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sparseofdm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an SNR/Doppler/estimator sweep and write CSV")
    p.add_argument("--config", help="YAML experiment file (defaults if omitted)")
    p.add_argument("--out", help="CSV output path (overrides sweep.output)")
    p.add_argument("--seed", type=int, help="master seed (overrides sweep.master_seed)")
    p.add_argument("--workers", type=int, default=None, help="parallel cell workers")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("analyze", help="thresholding statistics: closed forms vs Monte Carlo")
    p.add_argument("--sigma-n2", type=float, required=True)
    p.add_argument("--sigma-tap2", type=float, required=True)
    p.add_argument("--p-tap", type=float, required=True)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_analyze)

    p = sub.add_parser("plot", help="render a sweep CSV as an SVG line chart")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metric", default="ber_coded", choices=["ber_coded", "ber_raw", "cfr_mse"])
    p.set_defaults(func=_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
