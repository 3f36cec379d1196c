"""Command-line entry point.

Subcommands: theory, permittivity, calibrate, extract, compare. Each run
writes a timestamped directory under the configured out_dir (or exactly
into --out when given) containing the resolved configuration, CSV tables,
a text summary and figures.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import parse_config
from .exceptions import ConfigError, ConvergenceError, DataError


def _add_common(parser, with_config=True):
    if with_config:
        parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", help="output directory (default: timestamped run dir)")
    return parser


def _add_theory_flags(parser):
    parser.add_argument("--carriers", choices=("on", "off", "both"), help="override config")
    parser.add_argument("--band", choices=("lower", "upper", "both"), help="override config")
    parser.add_argument("--tolerance", type=float, help="override quadrature relative tolerance")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimirkit",
        description="Sphere-plate Casimir forces for layered stacks and "
        "force-distance measurement analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = _add_common(sub.add_parser("theory", help="force curves and permittivities"))
    _add_theory_flags(p)

    p = _add_common(sub.add_parser("permittivity", help="permittivity curves only"))
    _add_theory_flags(p)

    p = _add_common(sub.add_parser("calibrate", help="electrostatic calibration"))
    p.add_argument("--data", required=True, help="directory of force-distance CSV curves")

    p = _add_common(sub.add_parser("extract", help="calibrate and extract the Casimir force"))
    p.add_argument("--data", required=True, help="directory of force-distance CSV curves")

    p = _add_common(sub.add_parser("compare", help="experiment vs theory band"), with_config=False)
    p.add_argument("--theory", required=True, help="force-curve CSV (a_nm,f_lower_pn,f_upper_pn)")
    p.add_argument("--theory2", help="optional carriers-off force-curve CSV for the reduction profile")
    p.add_argument("--experiment", required=True, help="experiment CSV from the extract step")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    return parser


def _resolve_out(args, config, command: str) -> Path:
    if args.out:
        return Path(args.out)
    base = Path(config.out_dir if config is not None else "runs")
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return base / f"{stamp}-{command}"


def _apply_overrides(config, args):
    if getattr(args, "carriers", None):
        config.carriers = args.carriers
    if getattr(args, "band", None):
        config.band = args.band
    if getattr(args, "tolerance", None):
        config.quad_rel_tol = args.tolerance
    if getattr(args, "no_figures", False):
        config.figures = False
    return config.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from . import pipeline

    try:
        if args.command == "compare":
            out = _resolve_out(args, None, args.command)
            report = pipeline.run_compare(
                args.theory,
                args.experiment,
                out,
                theory_off_csv=args.theory2,
                figures=not args.no_figures,
            )
            print(f"compared {report.a_nm.size} points; "
                  f"{report.fraction_agreeing * 100:.1f}% agree -> {out}")
            return 0

        config = _apply_overrides(parse_config(args.config), args)
        out = _resolve_out(args, config, args.command)
        if args.command == "theory":
            pipeline.run_theory(config, out)
        elif args.command == "permittivity":
            pipeline.run_permittivity(config, out)
        elif args.command == "calibrate":
            pipeline.run_calibrate(config, args.data, out)
        elif args.command == "extract":
            pipeline.run_extract(config, args.data, out)
        print(f"{args.command} run written to {out}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
