"""``logse`` command line: ``logse <experiment> [--config F] [--out D] [--seed S] [--preset P]``.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up.
"""

import argparse
import json
import logging
import sys

from .experiments import KINDS, PRESETS, ConfigError, load_config, run_experiment
from .initial_data import ProfileConvergenceError
from .propagators import BlowUpError

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3

log = logging.getLogger("logse")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser():
    parser = _Parser(prog="logse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON file overriding the preset")
        p.add_argument("--out", default=f"out/{kind}", help="output directory")
        p.add_argument("--seed", type=_u64, default=None, help="64-bit seed (disorder potential)")
        p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _summary(kind, result):
    if kind in ("temporal", "spatial", "cfl"):
        return {"slopes": result.slopes, "flags": result.flags}
    if kind == "soliton":
        return {f"v={r.velocity:g}/{r.potential}": r.centroids[-1][1:] for r in result}
    if kind == "vortex":
        return {"zero_counts": result.zero_counts()}
    return {"residual": result.residual}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.experiment, args.preset, args.config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("running %s (preset %s) into %s", cfg.kind, cfg.preset, args.out)
    try:
        result = run_experiment(cfg, args.out)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ProfileConvergenceError as exc:
        print(f"profile solve failed: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(_summary(cfg.kind, result), indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
