"""
Command line entry point.

    holderlab <experiment> [--config PATH] [--out DIR] [--seed N] [--plots]
    holderlab run --config PATH [--out DIR] [--seed N] [--plots]
    holderlab verify DIR

Exit codes: 0 success, 2 configuration or input error, 3 solver error.
"""

import argparse
import sys

from ..errors import ConfigError, DomainError, HolderLabError
from .config import EXPERIMENTS, load_config, parse_config
from .runner import run_experiment, verify_manifest

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def build_parser():
    ap = argparse.ArgumentParser(prog="holderlab", description="Hölder regularity experiments for partially hyperbolic toy systems.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run",) + EXPERIMENTS:
        p = sub.add_parser(name, help="run the %s experiment" % name if name != "run" else "run the experiment named in the config")
        p.add_argument("--config", required=name == "run", help="INI config file")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
        p.add_argument("--seed", type=int, help="random seed (overrides [numeric] seed)")
        p.add_argument("--plots", action="store_true", help="also write SVG plots")
    v = sub.add_parser("verify", help="re-hash the artifacts listed in a run manifest")
    v.add_argument("directory")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        try:
            bad = verify_manifest(args.directory)
        except OSError as exc:
            print("error: %s" % exc, file=sys.stderr)
            return EXIT_CONFIG
        for name in bad:
            print("changed: %s" % name)
        return EXIT_OK if not bad else EXIT_SOLVER
    overrides = {"out": args.out, "seed": args.seed, "plots": args.plots}
    experiment = None if args.command == "run" else args.command
    try:
        if args.config:
            cfg = load_config(args.config, experiment, overrides)
        else:
            cfg = parse_config("", experiment, overrides)
    except ConfigError as exc:
        print("config error [%s]: %s" % (exc.field, exc), file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths, summary = run_experiment(cfg)
    except DomainError as exc:
        print("input error in %s: %s" % (cfg.experiment, exc), file=sys.stderr)
        return EXIT_CONFIG
    except HolderLabError as exc:
        print("solver error in %s (%s): %s" % (cfg.experiment, type(exc).__name__, exc), file=sys.stderr)
        return EXIT_SOLVER
    for key, value in summary.items():
        print("%s = %s" % (key, value))
    for p in paths:
        print("wrote %s" % p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
