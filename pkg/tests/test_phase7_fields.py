"""
tests/test_phase7_fields.py
===========================
Phase 7: Fields from solved densities.
Disk scenes against the separation-of-variables solution, region handling,
far-field reciprocity, lattice evaluation and corner asymptotics.
"""

import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np

from core.exceptions import GeometryError, RegionError
from core.models import REGION_BOUNDARY, REGION_EXTERIOR, REGION_INTERIOR
from fields.corner import corner_continuity, corner_exponent_fit, corner_fits, corner_profile
from fields.grid import grid_eval, grid_spec_for, oracle_error, overresolved_error, probe_points
from fields.oracle import disk_oracle
from fields.representation import (eval_gradU, eval_U, far_field, tag_points,
                                   traces_from_density, transmission_residual)
from geometry.curves import make_circle, make_starfish, make_teardrop
from geometry.mesh import make_mesh
from operators.system import assemble_dirac_system, rhs_plane_wave
from simulation.scenarios import CASES
from solver.direct import solve_direct

K_MINUS = 3.0
DIRECTION = np.pi / 4

_disk = {}


def _disk_scene():
    """Positive-dielectric unit disk, solved once and shared."""
    if not _disk:
        mesh = make_mesh(make_circle(1.0), 32)
        case = CASES["positive"]
        system = assemble_dirac_system(K_MINUS, case.k_hat, case.eps_hat, mesh, keep_blocks=True)
        h = solve_direct(system, rhs_plane_wave(K_MINUS, DIRECTION, mesh, system.params))
        oracle = disk_oracle(1.0, K_MINUS, case.k_hat, case.eps_hat, DIRECTION)
        _disk.update(mesh=mesh, system=system, h=h, oracle=oracle)
    return _disk["mesh"], _disk["system"], _disk["h"], _disk["oracle"]


def _rings():
    angles = np.exp(2j * np.pi * (np.arange(16) + 0.25) / 16)
    return 0.5 * angles, 1.8 * angles


def _raises(exc_type, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc_type:
        return True
    return False


def test_disk_fields_match_oracle():
    """U± on two rings agree with the modal solution."""
    mesh, system, h, oracle = _disk_scene()
    h_plus, h_minus = traces_from_density(h, system.params)
    interior, exterior = _rings()
    err_in = np.max(np.abs(eval_U(h_plus, system.k_plus, mesh, interior, "+")
                           - oracle.evaluate(interior, "+")))
    err_out = np.max(np.abs(eval_U(h_minus, system.k_minus, mesh, exterior, "-")
                            - oracle.evaluate(exterior, "-")))
    assert max(err_in, err_out) < 1e-8, f"interior {err_in:.2e}, exterior {err_out:.2e}"
    print("  PASS: disk fields vs oracle")


def test_disk_gradients_match_oracle():
    """∇U± agree with the modal gradient."""
    mesh, system, h, oracle = _disk_scene()
    h_plus, h_minus = traces_from_density(h, system.params)
    interior, exterior = _rings()
    err_in = np.max(np.abs(eval_gradU(h_plus, system.k_plus, mesh, interior, "+")
                           - oracle.gradient(interior, "+")))
    err_out = np.max(np.abs(eval_gradU(h_minus, system.k_minus, mesh, exterior, "-")
                            - oracle.gradient(exterior, "-")))
    assert max(err_in, err_out) < 1e-7, f"interior {err_in:.2e}, exterior {err_out:.2e}"
    print("  PASS: disk gradients vs oracle")


def test_transmission_conditions():
    """Normal limits of the fields satisfy both jump conditions; the oracle does too."""
    _, system, h, oracle = _disk_scene()
    jumps = transmission_residual(system, h, DIRECTION)
    assert jumps["dirichlet"] < 1e-8 and jumps["neumann"] < 1e-8, jumps
    modal = oracle.boundary_residual()
    assert modal["dirichlet"] < 1e-11 and modal["neumann"] < 1e-11, modal
    print("  PASS: transmission conditions")


def test_transmission_residual_detects_wrong_density():
    """A density solved for another ε̂ or perturbed off the solution fails the jumps."""
    mesh, system, h, _ = _disk_scene()
    case = CASES["positive"]
    other = assemble_dirac_system(K_MINUS, case.k_hat, 2.0 * case.eps_hat, mesh)
    h_other = solve_direct(other, rhs_plane_wave(K_MINUS, DIRECTION, mesh, other.params))
    wrong = transmission_residual(system, h_other, DIRECTION)
    assert max(wrong.values()) > 1e-3, wrong

    rng = np.random.default_rng(3)
    noisy = h + 1e-6 * np.max(np.abs(h)) * rng.normal(size=h.shape)
    assert max(transmission_residual(system, noisy, DIRECTION, n_samples=90).values()) > 1e-8
    print("  PASS: transmission residual detects wrong densities")



def test_traces_from_density():
    """h⁺ = N'h and h⁻ = P'h per component; bad lengths raise."""
    _, system, h, _ = _disk_scene()
    h_plus, h_minus = traces_from_density(h, system.params)
    n = system.mesh.n_nodes
    for c in range(4):
        assert np.array_equal(h_plus[c * n:(c + 1) * n], system.params.N_prime[c] * h[c * n:(c + 1) * n])
        assert np.array_equal(h_minus[c * n:(c + 1) * n], system.params.P_prime[c] * h[c * n:(c + 1) * n])
    assert _raises(ValueError, traces_from_density, np.zeros(7), system.params)
    print("  PASS: one-sided densities")


def test_region_errors():
    """Points in the wrong region or on the curve raise RegionError."""
    mesh, system, h, _ = _disk_scene()
    h_plus, _ = traces_from_density(h, system.params)
    assert _raises(RegionError, eval_U, h_plus, system.k_plus, mesh, [2.0], "+")
    assert _raises(RegionError, eval_U, h_plus, system.k_plus, mesh, [mesh.z[7]], "+")
    assert _raises(ValueError, eval_U, h_plus, system.k_plus, mesh, [0.1], "inside")
    print("  PASS: region errors")


def test_tag_points():
    """Interior, exterior, boundary and collar tags."""
    mesh, _, _, _ = _disk_scene()
    region, collar = tag_points(mesh, [0.0, 2.0, mesh.z[3], 0.999, 1.001])
    expected = [REGION_INTERIOR, REGION_EXTERIOR, REGION_BOUNDARY, REGION_INTERIOR, REGION_EXTERIOR]
    assert list(region) == expected, region
    assert list(collar) == [False, False, True, True, True]
    print("  PASS: point tagging")


def test_far_field_reciprocity():
    """u∞(x̂; d) = u∞(-d; -x̂) on a non-symmetric scatterer."""
    mesh = make_mesh(make_starfish(5, 0.3), 64)
    case = CASES["positive"]
    system = assemble_dirac_system(2.0, case.k_hat, case.eps_hat, mesh)
    theta, d = 0.4, 2.2

    def pattern(direction, angle):
        h = solve_direct(system, rhs_plane_wave(2.0, direction, mesh, system.params))
        _, h_minus = traces_from_density(h, system.params)
        return far_field(h_minus, 2.0, mesh, [angle])[0]

    forward = pattern(d, theta)
    backward = pattern(theta + np.pi, d + np.pi)
    assert abs(forward - backward) < 1e-8 * max(1.0, abs(forward)), f"{forward} vs {backward}"
    print("  PASS: far-field reciprocity")


def test_grid_eval_against_oracle():
    """Lattice evaluation away from the collar agrees with the oracle."""
    mesh, system, h, oracle = _disk_scene()
    spec = grid_spec_for(mesh, 9, 9, margin=0.5)
    grid = grid_eval(h, system, spec, workers=2)
    assert grid.U.shape == (9, 9) and grid.gradU is None
    assert np.all(np.isfinite(grid.U[grid.region != REGION_BOUNDARY]))
    errors, summary = oracle_error(grid, oracle)
    assert errors.shape == (9, 9)
    assert summary["max_error_away"] < 1e-8, summary
    self_errors, self_summary = overresolved_error(grid, grid)
    assert self_summary["max_error"] == 0.0
    print("  PASS: lattice evaluation")


def test_grid_collar_against_oracle():
    """Lattice points within a panel length of the curve stay within 1e-7 of the oracle."""
    mesh, system, h, oracle = _disk_scene()
    spec = grid_spec_for(mesh, 31, 31, margin=0.2)
    grid = grid_eval(h, system, spec, workers=2)
    errors, summary = oracle_error(grid, oracle)
    near = grid.collar & np.isfinite(errors)
    assert np.sum(near) > 100, np.sum(near)
    assert summary["max_error_collar"] < 1e-7, summary
    assert summary["max_error_away"] < 1e-9, summary
    print("  PASS: collar lattice vs oracle")



def test_overresolved_grid_mismatch():
    """Reference grids must share the lattice."""
    mesh, system, h, _ = _disk_scene()
    a = grid_eval(h, system, grid_spec_for(mesh, 4, 4))
    b = grid_eval(h, system, grid_spec_for(mesh, 5, 4))
    assert _raises(ValueError, overresolved_error, a, b)
    print("  PASS: reference grid checks")


def test_probe_points():
    """Probes ring the curve at 1.5x outside and a quarter inside."""
    mesh, _, _, _ = _disk_scene()
    outside = probe_points(mesh, 10, "-")
    inside = probe_points(mesh, 6, "+")
    assert outside.size == 10 and np.allclose(np.abs(outside), 1.5, atol=1e-12)
    assert inside.size == 6 and np.allclose(np.abs(inside), 0.25, atol=1e-12)
    print("  PASS: probe points")


def _power_law_density(mesh, eta):
    corner = complex(mesh.curve.position(np.array([0.0]))[0])
    h = np.zeros(4 * mesh.n_nodes, dtype=complex)
    n = mesh.n_nodes
    h[:n] = 1.0
    h[2 * n:3 * n] = np.abs(mesh.z - corner) ** eta
    return h


def test_corner_fit_recovers_exponent():
    """A synthetic t^η density is fitted exactly on both sides."""
    mesh = make_mesh(make_teardrop(np.pi / 2), 8, grading=14)
    eta = 0.3 + 0.2j
    fits = corner_fits(_power_law_density(mesh, eta), mesh)
    assert [f.side for f in fits] == ["right", "left"]
    for fit in fits:
        assert fit.accepted and abs(fit.eta - eta) < 1e-10, fit
        assert fit.n_points == 160
    print("  PASS: corner exponent fit")


def test_corner_fit_rejects_non_power_law():
    """Oscillating data fail the residual threshold."""
    mesh = make_mesh(make_teardrop(np.pi / 2), 8, grading=12)
    h = _power_law_density(mesh, 0.5)
    n = mesh.n_nodes
    h[2 * n:3 * n] *= 1.0 + 0.9 * np.sin(40.0 * np.log(np.abs(mesh.z)))
    fit = corner_exponent_fit(h, mesh, "right")
    assert not fit.accepted
    print("  PASS: non-power-law rejected")


def test_corner_requirements():
    """Smooth curves and shallow grading raise GeometryError."""
    circle = make_mesh(make_circle(1.0), 8)
    shallow = make_mesh(make_teardrop(), 8, grading=5)
    graded = make_mesh(make_teardrop(), 8, grading=12)
    assert _raises(GeometryError, corner_exponent_fit, np.ones(4 * circle.n_nodes), circle)
    assert _raises(GeometryError, corner_exponent_fit, np.ones(4 * shallow.n_nodes), shallow)
    assert _raises(GeometryError, corner_profile, np.ones(4 * circle.n_nodes), circle)
    assert _raises(ValueError, corner_exponent_fit, _power_law_density(graded, 0.5), graded, "up")
    print("  PASS: corner requirements")


def test_corner_profile_and_continuity():
    """Profile splits the curve at the corner; a continuous h₁ has no jump."""
    mesh = make_mesh(make_teardrop(), 8, grading=12)
    h = _power_law_density(mesh, 0.5)
    profile = corner_profile(h, mesh)
    assert profile["h"].shape == (4, mesh.n_nodes)
    assert profile["side"][0] == 1 and profile["side"][-1] == -1
    assert abs(profile["distance"][0] - profile["distance"][-1]) < 1e-12
    continuity = corner_continuity(h, mesh)
    assert continuity["h1_jump"] == 0.0 and continuity["h2_max_near_corner"] == 0.0
    print("  PASS: corner profile and continuity")


if __name__ == "__main__":
    print("=== Phase 7: Fields ===")
    test_disk_fields_match_oracle()
    test_disk_gradients_match_oracle()
    test_transmission_conditions()
    test_transmission_residual_detects_wrong_density()
    test_traces_from_density()
    test_region_errors()
    test_tag_points()
    test_far_field_reciprocity()
    test_grid_eval_against_oracle()
    test_grid_collar_against_oracle()
    test_overresolved_grid_mismatch()
    test_probe_points()
    test_corner_fit_recovers_exponent()
    test_corner_fit_rejects_non_power_law()
    test_corner_requirements()
    test_corner_profile_and_continuity()
    print("All Phase 7 tests passed.\n")
