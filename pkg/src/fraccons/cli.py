"""Command-line entry point.

    fraccons run --config FILE [--preset NAME] [--out DIR] [--strict-cfl]
    fraccons sweep --config FILE --axis dt|dx|alpha --values 0.1,0.2,...
    fraccons locus --alpha A --n LEVELS --samples K
    fraccons presets [--dump NAME]

Exit codes: 0 success, 2 configuration, 3 numerical abort (non-finite
state or strict CFL violation), 4 implicit sweep non-convergence, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import PRESETS, expand_preset, load_config
from .harness import fmt, run, sweep
from .mesh import ConfigurationError
from .schemes import CflViolation, NonFiniteStateError, SweepNonConvergence
from .stability import write_locus_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SWEEP = 4
EXIT_IO = 5


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset")
    p.add_argument("--out", help="output directory (overrides $FRACCONS_OUT and the config)")
    p.add_argument("--strict-cfl", action="store_true", default=None,
                   help="abort when an explicit step exceeds the CFL bound")
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--alpha", type=float)
    p.add_argument("--scheme", choices=["explicit1", "muscl", "implicit"])
    p.add_argument("--limiter", choices=["minmod", "van_leer"])
    p.add_argument("--record-every", type=int)
    p.add_argument("--name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraccons",
                                     description="Time-fractional conservation law solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    _add_config_args(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    _add_config_args(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=["dt", "dx", "alpha"])
    p_sweep.add_argument("--values", required=True, type=_float_list)
    p_sweep.add_argument("--workers", type=int, default=1)

    p_locus = sub.add_parser("locus", help="boundary locus of fractional backward Euler")
    p_locus.add_argument("--alpha", type=float, required=True)
    p_locus.add_argument("--n", type=int, required=True)
    p_locus.add_argument("--samples", type=int, default=512)
    p_locus.add_argument("--out", help="CSV file (default stdout)")

    p_presets = sub.add_parser("presets", help="list presets or dump one as JSON")
    p_presets.add_argument("--dump", metavar="NAME")
    return parser


def _config_from_args(args):
    if args.config is None and args.preset is None:
        raise ConfigurationError("give --config and/or --preset")
    overrides = {
        "dt": args.dt, "T": args.T, "alpha": args.alpha, "scheme": args.scheme,
        "limiter": args.limiter, "record_every": args.record_every,
        "strict_cfl": args.strict_cfl, "name": args.name,
    }
    return load_config(args.config, args.preset, overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    report = run(cfg, out=args.out)
    print(json.dumps({k: (fmt(v) if isinstance(v, float) else v)
                      for k, v in report.summary().items()}, indent=2))
    print(f"output: {report.output_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    result = sweep(cfg, args.axis, args.values, out=args.out, workers=args.workers)
    for row in result.table():
        print(",".join(row))
    if result.slope is not None:
        print(f"slope: {fmt(result.slope)}")
    if result.threshold is not None:
        print(f"stability threshold between {fmt(result.threshold[0])} and {fmt(result.threshold[1])}")
    if result.cfl_bound is not None:
        print(f"analytic CFL bound: {fmt(result.cfl_bound)}")
    print(f"output: {result.output_dir}")
    return EXIT_OK


def _cmd_locus(args) -> int:
    if args.out:
        write_locus_csv(args.out, args.alpha, args.n, args.samples)
    else:
        write_locus_csv(sys.stdout, args.alpha, args.n, args.samples)
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.dump:
        print(json.dumps(expand_preset(args.dump).to_dict(), indent=2))
        return EXIT_OK
    for name in sorted(PRESETS):
        p = PRESETS[name]
        print(f"{name:34s} [{', '.join(p.get('experiments', []))}] {p.get('description', '')}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "locus": _cmd_locus,
                "presets": _cmd_presets}
    try:
        return handlers[args.command](args)
    except (NonFiniteStateError, CflViolation) as exc:
        category, code, msg = "numerical", EXIT_NUMERICAL, exc
    except SweepNonConvergence as exc:
        category, code, msg = "sweep", EXIT_SWEEP, exc
    except (ConfigurationError, ValueError, KeyError) as exc:
        category, code, msg = "config", EXIT_CONFIG, exc
    except OSError as exc:
        category, code, msg = "io", EXIT_IO, exc
    print(f"fraccons: error[{category}]: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
