"""
main.py
=======
Entry point for the Dirac boundary-integral transmission solver.

Usage:
    python main.py selftest                         # invariant suite
    python main.py selftest --fault ek-row2         # must FAIL the E_k check
    python main.py sweep --case positive --shape starfish --panels 61 --kmax 20 --samples 400
    python main.py sweep --case reverse-plasmonic --shape starfish --panels 61 --refine-peaks
    python main.py scatter --shape circle --case positive --k-minus 5
    python main.py scatter --scene plasmonic --muller
    python main.py corner --case plasmonic --shape teardrop --refine 16
    python main.py params --case plasmonic
    python main.py params --k-hat 1.5 --eps-hat 2.25
    python main.py sweep --list                     # list material cases and scenes

Common options:
    --config FILE     : key = value experiment file (see core/config.py)
    --set KEY=VALUE   : override one config key (repeatable, applied after the file)
    -v / -vv          : INFO / DEBUG logging

Exit codes:
    0  success
    1  check or convergence failure
    2  usage or configuration error
"""

import argparse
import logging
import sys

from core.config import load_config, parse_complex
from core.exceptions import ConfigError, GeometryError, ParameterError, RegionError, SolverError
from simulation.runner import cmd_corner, cmd_params, cmd_scatter, cmd_selftest, cmd_sweep
from simulation.scenarios import CASES, SCENES, get_case, scene_config
from simulation.selftest import CHECKS, FAULTS

# Dedicated flags and the config key each one sets.
FLAG_KEYS = {
    "case": "case", "shape": "shape", "panels": "panels", "refine": "refine",
    "k_minus": "k_minus", "k_hat": "k_hat", "eps_hat": "eps_hat", "solver": "solver",
    "output_dir": "output_dir", "workers": "workers", "kmin": "kmin", "kmax": "kmax",
    "samples": "samples", "opening_angle": "opening_angle", "nx": "grid_nx", "ny": "grid_ny",
}


def main(argv=None) -> int:
    """
    Parse CLI arguments, dispatch the subcommand and map errors to exit codes.

    Returns:
        Process exit code.
    """
    args = _parse_args(argv)
    _configure_logging(args.verbose)

    if getattr(args, "list", False):
        _print_registry()
        return 0

    try:
        if args.command == "selftest":
            return cmd_selftest(fault=args.fault, report_path=args.report, only=args.only)
        if args.command == "params":
            return _run_params(args)

        config = _build_config(args)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "scatter":
            return cmd_scatter(config, save_matrix=args.save_matrix)
        return cmd_corner(config)
    except (ConfigError, GeometryError, ParameterError, RegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)-7s %(name)s: %(message)s")


def _print_registry() -> None:
    print("Material cases:")
    for name, case in CASES.items():
        print(f"  {name:<18} k̂ = {case.k_hat:.6g}, ε̂ = {case.eps_hat:.6g}  "
              f"(sweeps {case.sweep_variable})")
    print("Field scenes:")
    for name, scene in SCENES.items():
        print(f"  {name:<18} {scene['shape']}, {scene['panels']} panels, k- = {scene['k_minus']:.6g}")


def _build_config(args: argparse.Namespace):
    """Scene (if any), then config file, then --set, then dedicated flags."""
    base = scene_config(args.scene) if getattr(args, "scene", None) else None
    overrides = list(args.set or [])
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides.append(f"{key}={value}")
    for dest, key in (("refine_peaks", "refine_peaks"), ("muller", "muller"),
                      ("gradient", "gradient"), ("homotopy", "homotopy")):
        if getattr(args, dest, False):
            overrides.append(f"{key}=true")
    return load_config(args.config, overrides, base=base)


def _run_params(args: argparse.Namespace) -> int:
    if args.case is not None:
        case = get_case(args.case)
        k_hat, eps_hat = case.k_hat, case.eps_hat
    else:
        k_hat, eps_hat = parse_complex(args.k_hat), parse_complex(args.eps_hat)
    cmd_params(k_hat, eps_hat)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None,
                        help="key = value experiment file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="Override a config key (repeatable)")
    parser.add_argument("--list", action="store_true",
                        help="List material cases and field scenes and exit")
    parser.add_argument("--case", type=str, default=None,
                        help=f"Material case ({', '.join(CASES)})")
    parser.add_argument("--shape", type=str, default=None,
                        help="Curve: circle, starfish or teardrop")
    parser.add_argument("--panels", type=int, default=None, help="Number of panels")
    parser.add_argument("--refine", type=int, default=None,
                        help="Dyadic grading levels toward corners")
    parser.add_argument("--k-minus", dest="k_minus", type=str, default=None,
                        help="Exterior wavenumber (complex allowed, e.g. 5+0.1i)")
    parser.add_argument("--k-hat", dest="k_hat", type=str, default=None,
                        help="Custom k₊/k₋ (with --eps-hat)")
    parser.add_argument("--eps-hat", dest="eps_hat", type=str, default=None,
                        help="Custom permittivity ratio (with --k-hat)")
    parser.add_argument("--solver", type=str, default=None, choices=["direct", "gmres"],
                        help="Linear solver")
    parser.add_argument("--output-dir", dest="output_dir", type=str, default=None,
                        help="Directory for output files")
    parser.add_argument("--workers", type=int, default=None, help="Thread-pool size")


def _parse_args(argv=None) -> argparse.Namespace:
    """
    Define and parse CLI arguments.

    Returns:
        Parsed argparse.Namespace object.
    """
    parser = argparse.ArgumentParser(
        description="Dirac Boundary Integral Equation Transmission Solver",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="INFO logging; -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    selftest = sub.add_parser("selftest", help="Run the invariant suite")
    selftest.add_argument("--fault", type=str, default=None, choices=list(FAULTS),
                          help="Inject a known fault")
    selftest.add_argument("--report", type=str, default=None,
                          help="Write the JSON report to this path")
    selftest.add_argument("--only", action="append", choices=list(CHECKS),
                          help="Run only this check (repeatable)")

    sweep = sub.add_parser("sweep", help="Condition-number sweep")
    _add_common(sweep)
    sweep.add_argument("--kmin", type=float, default=None, help="Lower end (exclusive)")
    sweep.add_argument("--kmax", type=float, default=None, help="Upper end")
    sweep.add_argument("--samples", type=int, default=None, help="Number of samples")
    sweep.add_argument("--refine-peaks", dest="refine_peaks", action="store_true",
                       help="Refine flagged samples to the peak")

    scatter = sub.add_parser("scatter", help="Plane-wave field computation")
    _add_common(scatter)
    scatter.add_argument("--scene", type=str, default=None, choices=list(SCENES),
                         help="Load a registered field scene")
    scatter.add_argument("--nx", type=int, default=None, help="Grid points in x")
    scatter.add_argument("--ny", type=int, default=None, help="Grid points in y")
    scatter.add_argument("--gradient", action="store_true", help="Also evaluate ∇U")
    scatter.add_argument("--homotopy", action="store_true",
                         help="Approach real negative ε̂ along ε̂ + iδ")
    scatter.add_argument("--muller", action="store_true",
                         help="Cross-check against the Müller system at probe points")
    scatter.add_argument("--save-matrix", dest="save_matrix", action="store_true",
                         help="Write the system matrix binary")

    corner = sub.add_parser("corner", help="Density asymptotics at a corner")
    _add_common(corner)
    corner.add_argument("--opening-angle", dest="opening_angle", type=float, default=None,
                        help="Teardrop opening angle in radians")
    corner.add_argument("--homotopy", action="store_true",
                        help="Approach real negative ε̂ along ε̂ + iδ")

    params = sub.add_parser("params", help="Print P, P′, N, N′ in 2D and 3D")
    params.add_argument("--case", type=str, default=None, choices=list(CASES))
    params.add_argument("--k-hat", dest="k_hat", type=str, default=None)
    params.add_argument("--eps-hat", dest="eps_hat", type=str, default=None)

    args = parser.parse_args(argv)
    if args.command == "params" and args.case is None and (args.k_hat is None or args.eps_hat is None):
        params.error("give --case or both --k-hat and --eps-hat")
    return args


if __name__ == "__main__":
    sys.exit(main())
