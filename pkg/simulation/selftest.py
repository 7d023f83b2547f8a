"""
simulation/selftest.py
======================
Invariant suite run by `main.py selftest`.

Each check returns a CheckResult with the measured quantity and its
tolerance. Checks are independent; a failing or raising check does not stop
the others. A fault can be injected into the E_k block layout to confirm
that the involution check catches it.
"""

import itertools
import logging
import time
from typing import Optional

import numpy as np

from clifford.algebra import basis, clifford_mul, lcontract, wedge
from core.models import CheckResult
from fields.oracle import disk_oracle
from fields.representation import eval_U, transmission_residual, traces_from_density
from geometry.curves import make_circle
from geometry.mesh import make_mesh
from operators.cauchy import assemble_Ek, involution_error, plane_wave_trace, point_source_trace
from operators.params import dirac_params_2d, dirac_params_3d, figure_eight, well_posed
from operators.system import assemble_dirac_system, rhs_plane_wave
from quadrature.interactions import gauss_integral
from simulation.scenarios import CASES
from solver.direct import condition_number, solve_direct
from solver.gmres import gmres

logger = logging.getLogger(__name__)

INVOLUTION_WAVENUMBERS = (1.0, 5.0, 10.0 + 0.5j)


def _fault_signs(fault: Optional[str]) -> Optional[np.ndarray]:
    if fault is None:
        return None
    if fault not in FAULTS:
        raise ValueError(f"Unknown fault '{fault}'. Available: {', '.join(FAULTS)}")
    return FAULTS[fault]()


def _row_sign_flip(row: int) -> np.ndarray:
    signs = np.ones((4, 4))
    signs[row, :] = -1.0
    return signs


FAULTS = {
    "ek-row2": lambda: _row_sign_flip(1),
}


def _result(name: str, measured: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(measured <= tolerance), measured=float(measured),
                       tolerance=float(tolerance), detail=detail)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_clifford(fault: Optional[str] = None) -> CheckResult:
    """Associativity and uw = u⌟w + u∧w over all basis elements, n = 2, 3."""
    failures = 0
    for dim in (2, 3):
        blades = [basis(dim, s) for r in range(dim + 1)
                  for s in itertools.combinations(range(1, dim + 1), r)]
        for a, b, c in itertools.product(blades, repeat=3):
            left = clifford_mul(clifford_mul(a, b), c)
            right = clifford_mul(a, clifford_mul(b, c))
            failures += int((left - right).norm() > 0.0)
        for i in range(1, dim + 1):
            u = basis(dim, (i,))
            for w in blades:
                failures += int((clifford_mul(u, w) - lcontract(u, w) - wedge(u, w)).norm() > 0.0)
    return _result("clifford", failures, 0.0, "associativity and vector product split, n = 2, 3")


def check_gauss_identity(fault: Optional[str] = None) -> CheckResult:
    """Laplace Gauss integral inside, outside, near and on the unit circle."""
    mesh = make_mesh(make_circle(1.0), 16)
    inside = np.array([0.0, 0.5, 0.3 + 0.4j, 0.999, -0.9999j])
    outside = np.array([2.0, 1.001, -1.5 + 1.5j, 1.0001j])
    errors = np.concatenate([
        np.abs(gauss_integral(mesh, inside) - 2.0 * np.pi),
        np.abs(gauss_integral(mesh, outside)),
        np.abs(gauss_integral(mesh) - np.pi),
    ])
    return _result("gauss-identity", np.max(errors), 1e-10, "unit circle, 16 panels")


def check_involution(fault: Optional[str] = None) -> CheckResult:
    """‖E_k² - I‖ on the resolved subspace, unit circle, 16 panels."""
    mesh = make_mesh(make_circle(1.0), 16)
    signs = _fault_signs(fault)
    errors = [involution_error(k, mesh, block_signs=signs) for k in INVOLUTION_WAVENUMBERS]
    detail = ", ".join(f"k={k}: {e:.2e}" for k, e in zip(INVOLUTION_WAVENUMBERS, errors))
    if fault:
        detail += f" (fault '{fault}' injected)"
    return _result("ek-involution", max(errors), 1e-10, detail)


def check_hardy_splitting(fault: Optional[str] = None) -> CheckResult:
    """E_k f = f for a plane wave, E_k f = -f for an interior point source."""
    mesh = make_mesh(make_circle(1.0), 16)
    k = 5.0
    E = assemble_Ek(k, mesh, block_signs=_fault_signs(fault))
    plane = plane_wave_trace(k, mesh, np.pi / 4)
    source = point_source_trace(k, mesh, 0.2 + 0.1j)
    errors = (np.linalg.norm(E @ plane - plane) / np.linalg.norm(plane),
              np.linalg.norm(E @ source + source) / np.linalg.norm(source))
    return _result("hardy-splitting", max(errors), 1e-9,
                   f"plane wave {errors[0]:.2e}, point source {errors[1]:.2e}")


def random_parameters(n: int, seed: int = 0) -> list:
    """Admissible (k̂, ε̂) pairs away from the excluded sets."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < n:
        k_hat = rng.uniform(0.2, 5.0) * np.exp(1j * rng.uniform(-0.95 * np.pi, 0.95 * np.pi))
        eps_hat = rng.uniform(0.2, 5.0) * np.exp(1j * rng.uniform(-np.pi, np.pi))
        if abs(eps_hat + 1.0) < 0.1 or abs(k_hat**2 / eps_hat + 1.0) < 0.1:
            continue
        pairs.append((complex(k_hat), complex(eps_hat)))
    return pairs


def check_parameter_identity(fault: Optional[str] = None) -> CheckResult:
    """P(k̂M' + M)P' = I (2D) and P(k̂⁻¹M' + M)P' = I (3D) for random parameters."""
    residuals = []
    for k_hat, eps_hat in random_parameters(100):
        residuals.append(dirac_params_2d(k_hat, eps_hat).identity_residual())
        residuals.append(dirac_params_3d(k_hat, eps_hat).identity_residual())
    return _result("parameter-identity", max(residuals), 1e-15, "100 random (k̂, ε̂), 2D and 3D")


def check_well_posedness_table(fault: Optional[str] = None) -> CheckResult:
    """The three canonical cases are (in, in, out) of the uniqueness region."""
    expected = {"positive": True, "plasmonic": True, "reverse-plasmonic": False}
    mismatches = []
    for name, inside in expected.items():
        case = CASES[name]
        k_minus = 1.0 / case.k_hat if case.sweep_variable == "k_plus" else 1.0
        if well_posed(k_minus, case.k_hat, case.eps_hat) != inside:
            mismatches.append(name)
    return _result("well-posedness-table", len(mismatches), 0.0,
                   "mismatches: " + (", ".join(mismatches) or "none"))


def check_figure_eight(fault: Optional[str] = None) -> CheckResult:
    """Real-axis values ±sin(δπ/2) and conjugate symmetry in ξ."""
    xi = np.linspace(-10.0, 10.0, 201)
    errors = []
    for delta in (-0.5, 0.25, 0.75):
        upper, lower = figure_eight(0.0, delta)
        errors.append(abs(upper - np.sin(delta * np.pi / 2)))
        errors.append(abs(lower + np.sin(delta * np.pi / 2)))
        values, _ = figure_eight(xi, delta)
        mirrored, _ = figure_eight(-xi, delta)
        errors.append(float(np.max(np.abs(mirrored - np.conj(values)))))
    return _result("figure-eight", max(errors), 1e-15, "δ ∈ {-0.5, 0.25, 0.75}")


def check_low_frequency(fault: Optional[str] = None) -> CheckResult:
    """Condition number at k₋ = 1e-6 within 2x of its value at 1e-3."""
    mesh = make_mesh(make_circle(1.0), 16)
    case = CASES["positive"]
    conds = [condition_number(assemble_dirac_system(k, case.k_hat, case.eps_hat, mesh))
             for k in (1e-3, 1e-6)]
    ratio = max(conds) / min(conds)
    return _result("low-frequency", ratio, 2.0, f"cond {conds[0]:.3e} -> {conds[1]:.3e}")


def check_disk_scene(fault: Optional[str] = None) -> CheckResult:
    """Positive dielectric on the unit disk: oracle, jump residual, GMRES agreement."""
    mesh = make_mesh(make_circle(1.0), 32)
    case = CASES["positive"]
    k_minus, direction = 5.0, np.pi / 4
    system = assemble_dirac_system(k_minus, case.k_hat, case.eps_hat, mesh, keep_blocks=True)
    rhs = rhs_plane_wave(k_minus, direction, mesh, system.params)
    h = solve_direct(system, rhs)
    h_gmres, iterations = gmres(system, rhs)

    oracle = disk_oracle(1.0, k_minus, case.k_hat, case.eps_hat, direction)
    h_plus, h_minus = traces_from_density(h, system.params)
    angles = np.exp(2j * np.pi * (np.arange(24) + 0.25) / 24)
    interior, exterior = 0.5 * angles, 1.8 * angles
    field_error = max(
        np.max(np.abs(eval_U(h_plus, system.k_plus, mesh, interior, "+")
                      - oracle.evaluate(interior, "+"))),
        np.max(np.abs(eval_U(h_minus, system.k_minus, mesh, exterior, "-")
                      - oracle.evaluate(exterior, "-"))),
    )
    jumps = transmission_residual(system, h, direction)
    agreement = np.max(np.abs(h - h_gmres)) / np.max(np.abs(h))

    measured = max(field_error / 1e-9, max(jumps.values()) / 1e-8, agreement / 1e-10)
    detail = (f"oracle {field_error:.2e}, jumps {jumps['dirichlet']:.2e}/{jumps['neumann']:.2e}, "
              f"direct vs GMRES {agreement:.2e} ({iterations} iterations)")
    return _result("disk-scene", measured, 1.0, detail)


CHECKS = {
    "clifford":             check_clifford,
    "gauss-identity":       check_gauss_identity,
    "ek-involution":        check_involution,
    "hardy-splitting":      check_hardy_splitting,
    "parameter-identity":   check_parameter_identity,
    "well-posedness-table": check_well_posedness_table,
    "figure-eight":         check_figure_eight,
    "low-frequency":        check_low_frequency,
    "disk-scene":           check_disk_scene,
}


def run_selftest(fault: Optional[str] = None, only: Optional[list] = None) -> list:
    """
    Run the registered checks.

    Args:
        fault: Optional fault name from FAULTS to inject.
        only: Optional subset of check names.

    Returns:
        List of CheckResult in registry order.

    Raises:
        ValueError: On an unknown fault or check name.
    """
    _fault_signs(fault)
    names = list(CHECKS) if only is None else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown checks {unknown}. Available: {', '.join(CHECKS)}")

    results = []
    for name in names:
        start = time.perf_counter()
        try:
            result = CHECKS[name](fault)
        except Exception as exc:  # a crashing check is a failing check
            logger.exception("Check '%s' raised", name)
            result = CheckResult(name=name, passed=False, measured=float("nan"),
                                 tolerance=float("nan"), detail=f"{type(exc).__name__}: {exc}")
        result.detail += f" [{time.perf_counter() - start:.2f} s]"
        results.append(result)
    return results


def selftest_report(results: list, fault: Optional[str] = None) -> dict:
    """Machine-readable report."""
    return {
        "passed": all(r.passed for r in results),
        "fault": fault,
        "checks": [
            {"name": r.name, "passed": r.passed, "measured": r.measured,
             "tolerance": r.tolerance, "detail": r.detail}
            for r in results
        ],
    }
