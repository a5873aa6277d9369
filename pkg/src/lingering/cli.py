"""Command line entry point.

Exit codes: 0 success, 1 configuration or I/O error, 2 solver failure,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import harness
from .config import ConfigError, load, parse_values
from .csvio import CSVWriteError
from .diagnostics import DiagnosticError
from .dynamics import NumericalBlowUp
from .steady import SteadyStateError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BLOWUP = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lingering",
                                description="Memory-driven population movement simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", required=True, help="key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        if out:
            sp.add_argument("--out", help="output CSV (default: output.path)")
            sp.add_argument("--plot", action="store_true", help="also write an SVG line plot")
        return sp

    common(sub.add_parser("simulate", help="run the time stepper, write snapshot CSV"))
    common(sub.add_parser("steady", help="solve for the steady state, write profile CSV"))
    sw = common(sub.add_parser("sweep", help="parameter sweep, write report CSV"))
    sw.add_argument("--axis", choices=("mu", "alpha", "R"))
    sw.add_argument("--values", help="start:step:end or comma list")
    sw.add_argument("--mode", choices=("dynamics", "steady_movement", "steady_logistic"))
    sw.add_argument("--workers", type=int)
    d = common(sub.add_parser("diagnose", help="d u/d mu profile, lambda1, mass comparison"))
    d.set_defaults(plot=False)
    common(sub.add_parser("validate-config", help="parse and echo the resolved config"), out=False)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config, args.set)
        if args.command == "validate-config":
            harness.build(cfg)
            sys.stdout.write(cfg.dump())
            return EXIT_OK
        out = args.out or cfg.path("output.path")
        plot = getattr(args, "plot", False) or cfg["output.plot"]
        if args.command == "sweep":
            axis = args.axis or cfg["sweep.axis"]
            if args.values is not None:
                try:
                    values = parse_values(args.values)
                except ValueError as exc:
                    raise ConfigError("--values", str(exc)) from None
            else:
                values = cfg["sweep.values"]
            if values is None:
                raise ConfigError("sweep.values", "no sweep values given (config or --values)")
            mode = args.mode or cfg["sweep.mode"]
            workers = args.workers if args.workers is not None else cfg["sweep.workers"]
            if workers < 1:
                raise ConfigError("--workers", "must be at least 1")
        b = harness.build(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if not args.verbose else "default")
            if args.command == "simulate":
                harness.simulate(b, out, plot)
            elif args.command == "steady":
                harness.steady(b, out, plot)
            elif args.command == "sweep":
                pts = harness.sweep(b, out, axis, values, mode, workers, plot)
                failed = [p for p in pts if p.status != "ok"]
                if failed:
                    print(f"warning: {len(failed)} sweep point(s) failed; see status column",
                          file=sys.stderr)
            elif args.command == "diagnose":
                for key, value in harness.diagnose(b, out):
                    print(f"{key}={value}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CSVWriteError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowUp as exc:
        print(f"numerical blow-up (dynamics stage): {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (SteadyStateError, DiagnosticError) as exc:
        print(f"solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
