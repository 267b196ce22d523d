"""Command-line interface: sweep, kernel-study, bio-verify, solve.

Each subcommand reads an optional key=value config file plus flag overrides
mirroring the config keys, and writes CSV (and SVG, for the sweep) under the
output prefix.  Exit codes: 0 success, 1 configuration error, 2 when any
per-wavenumber computation failed.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments
from .config import (BioVerifyConfig, ConfigError, KernelStudyConfig,
                     SolveConfig, SweepConfig, parse_config_file)

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--output", help="output path prefix")
    parser.add_argument("-v", "--verbose", action="store_true")


def _override(parser_args, mapping, keys):
    for key in keys:
        value = getattr(parser_args, key, None)
        if value is not None:
            mapping[key] = value
    if parser_args.output is not None:
        mapping["output_prefix"] = parser_args.output
    return mapping


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fembem",
        description="2D acoustic scattering lab: coupled volume/boundary "
                    "solvers and spurious-resonance diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="wavenumber sweep with error curves")
    _add_common(p)
    p.add_argument("--kappa-min", dest="kappa_min")
    p.add_argument("--kappa-max", dest="kappa_max")
    p.add_argument("--kappa-step", dest="kappa_step")
    p.add_argument("--couplings", dest="couplings")
    p.add_argument("--kappa-mesh", dest="kappa_mesh")
    p.add_argument("--points-per-wavelength", dest="points_per_wavelength")
    p.add_argument("--gmres-tol", dest="gmres_tol")
    p.add_argument("--gmres-restart", dest="gmres_restart")
    p.add_argument("--gmres-maxit", dest="gmres_maxit")
    p.add_argument("--refine-near-resonances", dest="refine_near_resonances")
    p.add_argument("--no-plots", action="store_true", help="skip SVG output")

    p = sub.add_parser("kernel-study", help="interface-operator kernel diagnostics")
    _add_common(p)
    p.add_argument("--kappas", dest="kappas")
    p.add_argument("--couplings", dest="couplings")
    p.add_argument("--kappa-mesh", dest="kappa_mesh")
    p.add_argument("--points-per-wavelength", dest="points_per_wavelength")

    p = sub.add_parser("bio-verify", help="operator symbol and projector checks")
    _add_common(p)
    p.add_argument("--n-panels", dest="n_panels")
    p.add_argument("--kappa", dest="kappa")
    p.add_argument("--radius", dest="radius")
    p.add_argument("--max-mode", dest="max_mode")

    p = sub.add_parser("solve", help="single wavenumber solve with dumps")
    _add_common(p)
    p.add_argument("--kappa", dest="kappa")
    p.add_argument("--coupling", dest="coupling")
    p.add_argument("--kappa-mesh", dest="kappa_mesh")
    p.add_argument("--points-per-wavelength", dest="points_per_wavelength")
    p.add_argument("--gmres-tol", dest="gmres_tol")
    p.add_argument("--gmres-restart", dest="gmres_restart")
    p.add_argument("--gmres-maxit", dest="gmres_maxit")
    return parser


_CONFIG_KEYS = {
    "sweep": ("kappa_min", "kappa_max", "kappa_step", "couplings", "kappa_mesh",
              "points_per_wavelength", "gmres_tol", "gmres_restart",
              "gmres_maxit", "refine_near_resonances"),
    "kernel-study": ("kappas", "couplings", "kappa_mesh", "points_per_wavelength"),
    "bio-verify": ("n_panels", "kappa", "radius", "max_mode"),
    "solve": ("kappa", "coupling", "kappa_mesh", "points_per_wavelength",
              "gmres_tol", "gmres_restart", "gmres_maxit"),
}

_CONFIG_TYPES = {
    "sweep": SweepConfig,
    "kernel-study": KernelStudyConfig,
    "bio-verify": BioVerifyConfig,
    "solve": SolveConfig,
}


def _load_config(args):
    mapping = {}
    if args.config:
        mapping.update(parse_config_file(args.config))
    _override(args, mapping, _CONFIG_KEYS[args.command])
    return _CONFIG_TYPES[args.command].from_mapping(mapping)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    if args.command == "sweep":
        rows, csv_path, failures = experiments.run_sweep(
            config, write_plots=not args.no_plots)
        print(f"wrote {csv_path} ({len(rows)} rows)")
        if failures:
            print(f"{failures} wavenumber(s) failed; see log", file=sys.stderr)
            return 2
        return 0

    if args.command == "kernel-study":
        records, path = experiments.run_kernel_study(config)
        print(f"wrote {path} ({len(records)} records)")
        return 0

    if args.command == "bio-verify":
        records, path = experiments.run_bio_verify(config)
        print(f"wrote {path}")
        for rec in records:
            print(f"  N={rec['n_panels']}: max symbol errors "
                  f"V={rec['V']:.2e} K={rec['K']:.2e} Kp={rec['Kp']:.2e} "
                  f"W={rec['W']:.2e} yukawa={rec['yukawa']:.2e} "
                  f"defect={rec['defect']:.2e}")
        return 0

    if args.command == "solve":
        summary = experiments.run_single_solve(config)
        for key, value in summary.items():
            print(f"{key} = {value}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
