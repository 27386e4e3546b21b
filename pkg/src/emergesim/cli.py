"""Command line front end.

    emergesim run CONFIG [--figures]
    emergesim sweep CONFIG --param section.key=v1,v2 [--param ...] [--replicates N] [--jobs N]
    emergesim validate CONFIG

Exit status: 0 success, 1 configuration error, 2 runtime error.  Set
EMERGESIM_OUTPUT_ROOT to put relative output directories under another root.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import format_config, parse_config
from .errors import ConfigurationError
from .runner import parse_grid_spec, run_experiment, sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emergesim", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration")
    p.add_argument("config")
    p.add_argument("--figures", action="store_true", help="also render metrics.png and final_grid.png")

    p = sub.add_parser("sweep", help="run a parameter grid with replicates")
    p.add_argument("config")
    p.add_argument("--param", action="append", default=[], metavar="SECTION.KEY=V1,V2,...")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = _load(args.config)
        if args.command == "validate":
            sys.stdout.write(format_config(config))
        elif args.command == "run":
            manifest = run_experiment(config, figures=args.figures)
            print(f"wrote {len(manifest.files) + 1} files to {config.resolved_output_dir()}")
            for key, value in manifest.final_metrics.items():
                print(f"  {key} = {value}")
        else:
            _, rows = sweep(config, parse_grid_spec(args.param), args.replicates, args.jobs)
            failed = sum(r.status != "ok" for r in rows)
            print(f"{len(rows)} runs, {failed} failed; summary in {config.resolved_output_dir()}")
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
