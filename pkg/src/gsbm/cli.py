"""Command-line interface.

    gsbm <subcommand> --config <path> [--out <path>] [--seed <int>]
         [--trials <int>]

Subcommands map to the config `mode`: metric, sample, recover, sweep,
genie, flipbad, connectivity.  Exit codes: 0 success, 2 config error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .harness import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsbm")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in harness.MODES:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
    return parser


def _resolve_out(cfg, args, required: bool) -> str | None:
    out = args.out if args.out is not None else cfg.out
    if required and out is None:
        raise ConfigError([f"{args.subcommand} mode needs an output path (`out` or --out)"])
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = harness.load_config(args.config)
    except FileNotFoundError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    cfg.mode = args.subcommand

    try:
        if cfg.mode == "metric":
            text = harness.run_metric(cfg)
            out = _resolve_out(cfg, args, required=False)
            if out is None:
                sys.stdout.write(text)
            else:
                with open(out, "w") as fh:
                    fh.write(text)
        elif cfg.mode == "sample":
            print(harness.run_sample(cfg, _resolve_out(cfg, args, required=True)))
        elif cfg.mode == "recover":
            print(harness.run_recover(cfg, _resolve_out(cfg, args, required=True)))
        elif cfg.mode == "sweep":
            results = harness.run_sweep(cfg, _resolve_out(cfg, args, required=True))
            print(f"wrote {len(results)} new rows")
        elif cfg.mode == "genie":
            print(harness.run_genie(cfg, _resolve_out(cfg, args, required=True)))
        elif cfg.mode == "flipbad":
            print(harness.run_flipbad(cfg, _resolve_out(cfg, args, required=True)))
        elif cfg.mode == "connectivity":
            print(harness.run_connectivity(cfg, _resolve_out(cfg, args, required=True)))
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
