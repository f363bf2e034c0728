"""Command-line entry point: ``cohvol simulate``."""
import argparse
import logging
import sys
from dataclasses import replace

from .config import MODES, PRESETS, ConfigError, emit_config, parse_config, preset, validate
from .linalg import SingularChannelError
from .output import write_outputs
from .runner import run

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 1


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _str_list(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="cohvol", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample SINR fields and extract coherent volumes")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="FILE")
    src.add_argument("--preset", choices=PRESETS)
    sim.add_argument("--out", default="out", metavar="DIR")
    sim.add_argument("--grid-res", type=float, metavar="FLOAT",
                     help="field grid spacing in wavelengths")
    sim.add_argument("--threshold-db", type=_float_list, metavar="FLOAT[,FLOAT...]")
    sim.add_argument("--mode", choices=MODES)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--format", type=_str_list, metavar="csv,pgm")
    sim.add_argument("--nlos", action="store_true", help="preset variant with Rician scattering")

    show = sub.add_parser("show-config", help="print a preset as a config file")
    show.add_argument("preset", choices=PRESETS)
    show.add_argument("--seed", type=int)
    show.add_argument("--nlos", action="store_true")
    return parser


def load(args):
    if args.preset:
        config = preset(args.preset, seed=args.seed, nlos=args.nlos)
    else:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_config(fh.read())
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    if args.grid_res is not None:
        if not args.grid_res > 0:
            raise ConfigError("--grid-res must be positive")
        config = config.with_grid_spacing(args.grid_res * config.wavelength)
    if args.threshold_db:
        config = replace(config, thresholds_db=args.threshold_db)
    if args.mode:
        config = replace(config, mode=args.mode)
    if args.format:
        config = replace(config, formats=args.format)
    return validate(config)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "show-config":
        sys.stdout.write(emit_config(preset(args.preset, seed=args.seed, nlos=args.nlos)))
        return 0
    try:
        config = load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(config)
    except SingularChannelError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = write_outputs(result, args.out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
