"""Command line: ``run <config>``, ``preset <name>``, ``list-presets``.

The default output directory is ``$QSAWTOOTH_OUT`` or the working directory.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .presets import PRESETS, catalogue, get_preset, run_preset
from .runner import default_out_dir, run_config


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsawtooth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a key = value config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory")

    preset = sub.add_parser("preset", help="run a figure preset")
    preset.add_argument("name", choices=sorted(PRESETS))
    preset.add_argument("--out", help="output directory")
    preset.add_argument("--seed", type=int, help="master seed for every run of the preset")
    preset.add_argument("--threads", type=int, help="trajectory threads (0 = all cores)")
    preset.add_argument("--plot", action="store_true", help="also render PNG figures")

    sub.add_parser("list-presets", help="print the preset catalogue")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            print(catalogue())
            return 0
        out = args.out or default_out_dir()
        if args.command == "run":
            result = run_config(load_config(args.config), out)
            print(result.summary)
            return 0
        preset = get_preset(args.name).with_overrides(seed=args.seed, threads=args.threads)
        run_preset(preset, out, plot=args.plot)
        return 0
    except ConfigError as exc:
        print(f"qsawtooth: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"qsawtooth: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
