"""
simulation/runner.py
====================
Experiment commands behind the CLI.

Each command takes a validated ExperimentConfig, resolves the material case,
meshes the curve, runs the numerics and writes its outputs under
config.output_dir with a provenance header. Commands return an exit code:

    0   success
    1   check or convergence failure (partial outputs are still written)

Usage and config errors are raised (ConfigError, GeometryError,
ParameterError) and mapped to exit code 2 by main.py.

Inputs:  ExperimentConfig (from core/config.py and simulation/scenarios.py)
Outputs: CSV / JSON / binary files (simulation/export.py)
"""

import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from core.exceptions import (ConfigError, ConvergenceError, GeometryError, HomotopyError,
                             SingularMatrixError)
from core.models import DiracSystem, ExperimentConfig, Mesh
from fields.corner import WINDOW, corner_continuity, corner_fits, corner_profile
from fields.grid import grid_eval, grid_spec_for, oracle_error, overresolved_error, probe_points
from fields.oracle import disk_oracle
from fields.representation import (boundary_traces, eval_U, far_field, traces_from_density,
                                   transmission_residual)
from operators.muller import assemble_muller_baseline, muller_fields, muller_rhs
from operators.params import dirac_params_2d, dirac_params_3d, figure_eight, figure_eight_delta
from operators.system import assemble_dirac_system, rhs_plane_wave
from simulation import export
from simulation.scenarios import build_scene_mesh, material_case, resolve_config
from simulation.selftest import run_selftest, selftest_report
from solver.direct import solve_direct
from solver.gmres import gmres
from solver.homotopy import homotopy_solve
from solver.sweep import sweep, sweep_values

logger = logging.getLogger(__name__)

OVERRESOLUTION = 1.5
CORNER_REFINE = 16
FAR_FIELD_ANGLES = 36
N_PROBES = 10


@dataclass
class SceneSolution:
    """Solved density plus what the solve produced along the way."""
    system: DiracSystem
    h: np.ndarray
    status: str = "converged"
    message: str = ""
    iterations: Optional[int] = None
    homotopy: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "converged"


def _stem(config: ExperimentConfig, command: str) -> str:
    return os.path.join(config.output_dir, f"{command}_{config.shape}_{config.case}")


# ---------------------------------------------------------------------------
# Solving one scene
# ---------------------------------------------------------------------------

def _solve_linear(config: ExperimentConfig, system: DiracSystem, rhs: np.ndarray) -> SceneSolution:
    if config.solver == "direct":
        try:
            return SceneSolution(system, solve_direct(system, rhs))
        except SingularMatrixError as exc:
            logger.error("Direct solve failed: %s", exc)
            return SceneSolution(system, np.full(rhs.shape, np.nan + 0j), "singular", str(exc))
    try:
        h, iterations = gmres(system, rhs, tol=config.gmres_tol, max_iter=config.gmres_maxiter)
        return SceneSolution(system, h, iterations=iterations)
    except ConvergenceError as exc:
        logger.error("GMRES failed: %s", exc)
        return SceneSolution(system, exc.best, "not-converged", str(exc), iterations=exc.iterations)


def _solve_homotopy(config: ExperimentConfig, mesh: Mesh) -> SceneSolution:
    state = {}
    probes = probe_points(mesh, N_PROBES, side="-")

    def builder(eps: complex) -> tuple:
        system = assemble_dirac_system(config.k_minus, config.k_hat, eps, mesh)
        state["system"] = system
        return system.matrix, rhs_plane_wave(config.k_minus, config.direction, mesh, system.params)

    def probe(h: np.ndarray) -> np.ndarray:
        _, h_minus = traces_from_density(h, state["system"].params)
        return eval_U(h_minus, config.k_minus, mesh, probes, "-", check_region=False)

    target = assemble_dirac_system(config.k_minus, config.k_hat, config.eps_hat, mesh,
                                   keep_blocks=True)
    try:
        result = homotopy_solve(builder, config.eps_hat.real, delta0=config.homotopy_delta0,
                                ratio=config.homotopy_ratio, steps=config.homotopy_steps,
                                probe=probe, solver=config.solver, tol=config.gmres_tol,
                                max_iter=config.gmres_maxiter)
    except HomotopyError as exc:
        logger.error("%s", exc)
        return SceneSolution(target, exc.best, "homotopy-diverged", str(exc),
                             homotopy={"deltas": exc.deltas, "differences": exc.differences})
    return SceneSolution(
        target, result.solution,
        status="converged" if result.converged else "slow-homotopy",
        iterations=sum(result.iterations),
        homotopy={"deltas": result.deltas, "differences": result.differences,
                  "iterations": result.iterations, "limit_probe": result.limit_probe,
                  "probe_points": probes, "converged": result.converged},
    )


def solve_scene(config: ExperimentConfig, mesh: Mesh) -> SceneSolution:
    """
    Solve the plane-wave transmission problem of a resolved config on a mesh.

    Real negative ε̂ with homotopy enabled is approached along ε̂ + iδ.
    """
    if config.homotopy:
        return _solve_homotopy(config, mesh)
    system = assemble_dirac_system(config.k_minus, config.k_hat, config.eps_hat, mesh,
                                   keep_blocks=True)
    rhs = rhs_plane_wave(config.k_minus, config.direction, mesh, system.params)
    return _solve_linear(config, system, rhs)


def _muller_cross_check(config: ExperimentConfig, solution: SceneSolution, stem: str,
                        record: dict) -> dict:
    mesh = solution.system.mesh
    muller = assemble_muller_baseline(config.k_minus, config.k_hat, config.eps_hat, mesh)
    densities = solve_direct(muller.matrix, muller_rhs(muller, config.direction))
    h_plus, h_minus = traces_from_density(solution.h, solution.system.params)

    points, sides, dirac, baseline = [], [], [], []
    for side, h_pm, k in (("+", h_plus, solution.system.k_plus), ("-", h_minus, config.k_minus)):
        probes = probe_points(mesh, N_PROBES, side=side)
        points.append(probes)
        sides += [side] * probes.size
        dirac.append(eval_U(h_pm, k, mesh, probes, side))
        baseline.append(muller_fields(muller, densities, probes, side, config.direction))
    points, dirac, baseline = (np.concatenate(a) for a in (points, dirac, baseline))
    path = export.write_probe_csv(stem + "_muller.csv", points, sides,
                                  {"U_dirac": dirac, "U_muller": baseline}, record)
    difference = float(np.max(np.abs(dirac - baseline)))
    logger.info("Müller cross-check: max |U_dirac - U_muller| = %.3e", difference)
    return {"max_difference": difference, "file": path}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_selftest(fault: Optional[str] = None, report_path: Optional[str] = None,
                 only: Optional[list] = None) -> int:
    """Run the invariant suite; print one line per check and write the JSON report."""
    results = run_selftest(fault=fault, only=only)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"  {status}  {r.name:<{width}} : {r.measured:.3e} (tol {r.tolerance:.1e})  {r.detail}")
    report = selftest_report(results, fault=fault)
    if report_path:
        export.write_json(report_path, report)
        print(f"\nReport written to: {report_path}")
    failed = sum(not r.passed for r in results)
    print(f"\n{len(results) - failed}/{len(results)} checks passed.")
    return 0 if failed == 0 else 1


def cmd_sweep(config: ExperimentConfig) -> int:
    """Condition-number sweep of the configured case; writes the sweep CSV."""
    config = resolve_config(config)
    case = material_case(config)
    mesh = build_scene_mesh(config)
    result = sweep(case, mesh, k_range=(config.kmin, config.kmax), n_samples=config.samples,
                   with_gmres=config.solver == "gmres", workers=config.workers,
                   seed=config.seed, refine_peaks=config.refine_peaks)

    record = export.provenance(config, mesh, command="sweep", sweep_variable=case.sweep_variable)
    path = export.write_sweep_csv(_stem(config, "sweep") + ".csv", result, record)

    conds = np.array([r.cond_2 for r in result.records])
    values = sweep_values(result, case)
    label = "k+" if case.sweep_variable == "k_plus" else "k-"
    print(f"Sweep complete: {case.name}")
    print(f"  Samples          : {len(result.records)}")
    print(f"  Nodes            : {mesh.n_nodes}")
    print(f"  Condition range  : {conds.min():.3e} .. {conds.max():.3e}")
    print(f"  Resonance flags  : {result.n_flags}")
    for value, r in zip(values, result.records):
        if r.flag:
            print(f"    {label} = {value:.10f}  cond = {r.cond_2:.3e}{'  (refined)' if r.refined else ''}")
    print(f"  Output           : {path}")
    return 0


def cmd_scatter(config: ExperimentConfig, save_matrix: bool = False) -> int:
    """
    Solve one plane-wave scene and write density, traces, field grid, error
    map and the JSON solve report.
    """
    config = resolve_config(config)
    mesh = build_scene_mesh(config)
    stem = _stem(config, "scatter")
    record = export.provenance(config, mesh, command="scatter")
    solution = solve_scene(config, mesh)
    system = solution.system

    files = [export.write_density_csv(stem + "_density.csv", mesh, solution.h, record)]
    report = {"status": solution.status, "message": solution.message, "solver": config.solver,
              "gmres_iterations": solution.iterations, "homotopy": solution.homotopy or None,
              "n_unknowns": system.n_unknowns}

    if np.all(np.isfinite(solution.h)):
        traces = boundary_traces(system, solution.h)
        files.append(export.write_traces_csv(stem + "_traces.csv", mesh, traces, record))
        report["transmission_residual"] = transmission_residual(system, solution.h, config.direction)

        angles = 2.0 * np.pi * np.arange(FAR_FIELD_ANGLES) / FAR_FIELD_ANGLES
        _, h_minus = traces_from_density(solution.h, system.params)
        report["far_field"] = {"angles": angles,
                               "values": far_field(h_minus, config.k_minus, mesh, angles)}

        spec = grid_spec_for(mesh, config.grid_nx, config.grid_ny, config.grid_margin,
                             gradient=config.gradient)
        grid = grid_eval(solution.h, system, spec, workers=config.workers)
        errors, summary = _error_map(config, grid, spec)
        report["error"] = summary
        files += export.write_grid(stem + "_grid", grid, record, errors=errors)

        if config.muller:
            report["muller"] = _muller_cross_check(config, solution, stem, record)

    if save_matrix:
        files.append(export.write_matrix(stem + "_matrix.bin", system.matrix, record))
    report["files"] = files
    report_path = export.write_json(stem + "_report.json", report, record)

    print(f"Scatter complete: {config.case} on {config.shape}")
    print(f"  Unknowns         : {system.n_unknowns}")
    print(f"  k- / k+          : {complex(config.k_minus):.6g} / {system.k_plus:.6g}")
    print(f"  Status           : {solution.status}")
    if solution.iterations is not None:
        print(f"  GMRES iterations : {solution.iterations}")
    if "transmission_residual" in report:
        jumps = report["transmission_residual"]
        print(f"  Jump residuals   : {jumps['dirichlet']:.3e} (u), {jumps['neumann']:.3e} (∂ν u)")
    if "error" in report:
        print(f"  Error ({report['error']['reference']}) : "
              f"{report['error']['max_error_away']:.3e} away, "
              f"{report['error']['max_error_collar']:.3e} in collar")
    if "muller" in report:
        print(f"  Müller deviation : {report['muller']['max_difference']:.3e}")
    print(f"  Report           : {report_path}")
    return 0 if solution.ok else 1


def _error_map(config: ExperimentConfig, grid, spec) -> tuple:
    """Oracle error on the disk, overresolved estimate elsewhere."""
    if config.shape == "circle":
        oracle = disk_oracle(config.radius, config.k_minus, config.k_hat, config.eps_hat,
                             config.direction)
        errors, summary = oracle_error(grid, oracle)
        summary["reference"] = "oracle"
        return errors, summary

    panels = math.ceil(OVERRESOLUTION * config.panels)
    logger.info("Overresolved reference on %d panels", panels)
    fine = build_scene_mesh(config, panels=panels)
    reference = solve_scene(config, fine)
    if not np.all(np.isfinite(reference.h)):
        logger.warning("Reference solve failed (%s); no error map", reference.status)
        return None, {"reference": "none", "max_error": float("nan"),
                      "max_error_away": float("nan"), "max_error_collar": float("nan")}
    errors, summary = overresolved_error(grid, grid_eval(reference.h, reference.system, spec,
                                                         workers=config.workers))
    summary["reference"] = f"overresolved ({panels} panels)"
    return errors, summary


def cmd_corner(config: ExperimentConfig) -> int:
    """
    Power-law fits of h₃ on both sides of the corner, the density profile and
    the continuity of h₁, h₂ across the corner.
    """
    config = resolve_config(config)
    if config.refine == 0:
        config = replace(config, refine=CORNER_REFINE)
        logger.info("Corner grading defaulted to %d levels", CORNER_REFINE)
    if config.refine < WINDOW[1]:
        raise ConfigError(f"corner fits need refine >= {WINDOW[1]} (got {config.refine})",
                          field="refine")
    mesh = build_scene_mesh(config)
    if not mesh.curve.has_corners:
        raise GeometryError(f"Shape '{config.shape}' has no corner")
    stem = _stem(config, "corner")
    record = export.provenance(config, mesh, command="corner")
    solution = solve_scene(config, mesh)
    if not np.all(np.isfinite(solution.h)):
        export.write_json(stem + "_report.json",
                          {"status": solution.status, "message": solution.message}, record)
        print(f"Corner analysis failed: {solution.status}")
        return 1

    fits = corner_fits(solution.h, mesh)
    continuity = corner_continuity(solution.h, mesh)
    delta = figure_eight_delta(config.opening_angle)
    profile_path = export.write_profile_csv(stem + "_profile.csv", corner_profile(solution.h, mesh),
                                            record)
    report = {
        "status": solution.status,
        "message": solution.message,
        "fits": [{"side": f.side, "eta": f.eta, "residual": f.residual, "n_points": f.n_points,
                  "window": f.window, "accepted": f.accepted} for f in fits],
        "continuity": continuity,
        "figure_eight": {"delta": delta, "real_axis": figure_eight(0.0, delta)},
        "files": [profile_path],
    }
    report_path = export.write_json(stem + "_report.json", report, record)

    print(f"Corner analysis: {config.case} on {config.shape} "
          f"(θ = {config.opening_angle:.6f}, δ = {delta:.6f})")
    for f in fits:
        verdict = "power law" if f.accepted else "rejected"
        print(f"  η ({f.side:<5})        : {f.eta.real:+.8f} {f.eta.imag:+.8f}i  "
              f"residual {f.residual:.2e}  {verdict}")
    print(f"  h1 / h2 jump     : {continuity['h1_jump']:.3e} / {continuity['h2_jump']:.3e}")
    print(f"  Report           : {report_path}")
    return 0 if solution.ok and any(f.accepted for f in fits) else 1


def cmd_params(k_hat: complex, eps_hat: complex) -> dict:
    """Print the 2D and 3D diagonal matrices for (k̂, ε̂) and return them."""
    params_2d = dirac_params_2d(k_hat, eps_hat)
    params_3d = dirac_params_3d(k_hat, eps_hat)
    print(f"k̂ = {complex(k_hat)}, ε̂ = {complex(eps_hat)}")
    for label, params in (("2D", params_2d), ("3D", params_3d)):
        print(f"\n{label}  (identity residual {params.identity_residual():.2e})")
        for name in ("P", "P_prime", "N", "N_prime"):
            entries = ", ".join(f"{v.real:+.6g}{v.imag:+.6g}i" for v in getattr(params, name))
            print(f"  {name:<8}: [{entries}]")
    return {"2d": params_2d, "3d": params_3d}
