"""
tests/test_phase5_operators.py
==============================
Phase 5: Parameter matrices, the Cauchy singular operator and system assembly.
Checks the diagonal identities, the uniqueness-region table, the corner
spectrum curve, E_k² = I, the Hardy splitting of exact traces, and the
two-density baseline against the disk solution.
"""

import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
from scipy import special

from core.exceptions import ParameterError
from fields.oracle import disk_oracle
from geometry.curves import make_circle, make_starfish
from geometry.mesh import make_mesh
from operators.cauchy import (apply_ek, assemble_Ek, ek_blocks, involution_error,
                              plane_wave_trace, point_source_trace)
from operators.layers import kernel_tables, potential_operator
from operators.muller import assemble_muller_baseline, muller_fields, muller_rhs
from operators.params import (dirac_params_2d, dirac_params_3d, figure_eight, figure_eight_delta,
                              well_posed, wp_region_contains)
from operators.system import assemble_dirac_system, rhs_plane_wave
from quadrature.interactions import field_interactions
from simulation.scenarios import CASES
from simulation.selftest import random_parameters
from specfun.kernels import make_kernel


def _raises(exc_type, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc_type:
        return True
    return False


def test_parameter_identities():
    """P(k̂M' + M)P' = I, N = PM and N' = k̂M'P' for random parameters."""
    worst = 0.0
    for k_hat, eps_hat in random_parameters(100, seed=7):
        p2 = dirac_params_2d(k_hat, eps_hat)
        p3 = dirac_params_3d(k_hat, eps_hat)
        worst = max(worst, p2.identity_residual(), p3.identity_residual())
        assert np.allclose(p2.N, p2.P * p2.M, rtol=1e-15, atol=0)
        assert np.allclose(p2.N_prime, p2.kM_prime * p2.P_prime, rtol=1e-15, atol=0)
    assert worst < 1e-15, f"identity residual {worst:.2e}"
    print("  PASS: parameter identities (2D and 3D)")


def test_excluded_parameters():
    """Excluded k̂, ε̂ and μ̂ raise ParameterError."""
    assert _raises(ParameterError, dirac_params_2d, -1.0, 2.0)
    assert _raises(ParameterError, dirac_params_2d, 0.0, 2.0)
    assert _raises(ParameterError, dirac_params_2d, 1.5, -1.0)
    assert _raises(ParameterError, dirac_params_3d, 1.5, 0.0)
    assert _raises(ParameterError, dirac_params_3d, 1j, 1.0)  # μ̂ = -1
    print("  PASS: excluded parameters rejected")


def test_normalization_hook():
    """A normalization that breaks the identity is refused; a valid one is kept."""
    def broken(k_hat, eps_hat, M, kM_prime):
        return np.ones(4), np.ones(4)

    def scaled(k_hat, eps_hat, M, kM_prime):
        P = np.full(4, 2.0 + 0j)
        return P, 1.0 / (P * (kM_prime + M))

    assert _raises(ParameterError, dirac_params_2d, 1.5, 2.25, normalization=broken)
    params = dirac_params_2d(1.5, 2.25, normalization=scaled)
    assert params.identity_residual() < 1e-14
    assert np.allclose(params.P, 2.0)
    print("  PASS: normalization hook")


def test_well_posedness_table():
    """positive and plasmonic are inside the region, reverse-plasmonic outside."""
    assert well_posed(1.0, CASES["positive"].k_hat, CASES["positive"].eps_hat)
    assert well_posed(1.0, CASES["plasmonic"].k_hat, CASES["plasmonic"].eps_hat)
    reverse = CASES["reverse-plasmonic"]
    assert not well_posed(1.0 / reverse.k_hat, reverse.k_hat, reverse.eps_hat)
    assert _raises(ParameterError, wp_region_contains, 0.0, 1.0, 1.0)
    assert _raises(ParameterError, wp_region_contains, 1.0, 1.0 - 1j, 1.0)
    print("  PASS: uniqueness-region table")


def test_wp_region_branches():
    """Boundary cases of the region for real and purely imaginary k±."""
    # both real: only the real axis
    assert wp_region_contains(2.0, 1.0, 2.0) and wp_region_contains(-2.0, 1.0, 2.0)
    assert not wp_region_contains(1j, 1.0, 2.0)
    # both purely imaginary: everything but the negative axis
    assert wp_region_contains(1j, 1j, 2j)
    assert not wp_region_contains(-1.0, 1j, 2j)
    # k₊ real, k₋ imaginary: off the imaginary axis
    assert wp_region_contains(1.0 + 1j, 1j, 2.0)
    assert not wp_region_contains(1j, 1j, 2.0)
    print("  PASS: uniqueness-region branches")


def test_figure_eight():
    """Values ±sin(δπ/2) at ξ = 0; |δ| ≥ 1 raises; δ from the opening angle."""
    for delta in (-0.5, 0.25, 0.75):
        upper, lower = figure_eight(0.0, delta)
        assert abs(upper - np.sin(delta * np.pi / 2)) < 1e-15
        assert abs(lower + np.sin(delta * np.pi / 2)) < 1e-15
    assert _raises(ParameterError, figure_eight, 0.0, 1.0)
    assert abs(figure_eight_delta(np.pi / 2) + 0.5) < 1e-15
    assert abs(figure_eight_delta(3 * np.pi / 2) - 0.5) < 1e-15
    print("  PASS: figure-eight curve")


def test_ek_involution():
    """E_k² = I on the resolved subspace, improving under refinement; a sign fault breaks it."""
    mesh = make_mesh(make_circle(1.0), 16)
    for k in (1.0, 5.0, 10.0 + 0.5j):
        error = involution_error(k, mesh)
        assert error < 1e-10, f"k={k}: ‖E² - I‖ = {error:.2e}"
    coarse = involution_error(1.0, make_mesh(make_circle(1.0), 8))
    fine = involution_error(1.0, mesh)
    assert coarse > 10.0 * fine or fine < 1e-13, f"8 panels {coarse:.2e}, 16 panels {fine:.2e}"
    signs = np.ones((4, 4))
    signs[1, :] = -1.0
    assert involution_error(5.0, mesh, block_signs=signs) > 1e-2
    print("  PASS: E_k involution")


def test_single_layer_near_circle():
    """V1 just inside and outside the unit circle against iπ J0 H0."""
    mesh = make_mesh(make_circle(1.0), 16)
    k = 3.0
    angles = np.exp(2j * np.pi * (np.arange(8) + 0.3) / 8)
    for radius, exact in ((1.001, 1j * np.pi * special.jv(0, k) * special.hankel1(0, k * 1.001)),
                          (0.999, 1j * np.pi * special.jv(0, k * 0.999) * special.hankel1(0, k))):
        interactions = field_interactions(mesh, radius * angles)
        table = kernel_tables(make_kernel(k), interactions)
        values = potential_operator(1.0, table, interactions, mesh).sum(axis=1)
        error = np.max(np.abs(values - exact))
        assert error < 1e-10, f"r={radius}: error {error:.2e}"
    print("  PASS: single layer next to the circle")


def test_hardy_splitting():
    """E_k f = f for a plane wave, E_k f = -f for an interior point source."""
    mesh = make_mesh(make_starfish(5, 0.3), 32)
    k = 3.0
    E = assemble_Ek(k, mesh)
    plane = plane_wave_trace(k, mesh, 0.3)
    source = point_source_trace(k, mesh, 0.2 + 0.1j)
    assert np.linalg.norm(E @ plane - plane) / np.linalg.norm(plane) < 1e-8
    assert np.linalg.norm(E @ source + source) / np.linalg.norm(source) < 1e-8
    print("  PASS: Hardy splitting of exact traces")


def test_apply_ek_matches_matrix():
    """Block application equals the assembled matrix."""
    mesh = make_mesh(make_circle(1.0), 8)
    k = 2.0 + 0.1j
    h = np.random.default_rng(4).normal(size=4 * mesh.n_nodes) + 0j
    direct = assemble_Ek(k, mesh) @ h
    blocked = apply_ek(ek_blocks(k, mesh), h)
    assert np.max(np.abs(direct - blocked)) < 1e-12 * np.max(np.abs(direct))
    print("  PASS: apply_ek")


def test_system_assembly():
    """System shape, stored parameters and the right-hand side 2Nf⁰."""
    mesh = make_mesh(make_circle(1.0), 8)
    case = CASES["plasmonic"]
    system = assemble_dirac_system(2.0, case.k_hat, case.eps_hat, mesh)
    n = mesh.n_nodes
    assert system.matrix.shape == (4 * n, 4 * n)
    assert abs(system.k_plus - case.k_hat * 2.0) < 1e-15
    assert system.blocks_plus is None
    rhs = rhs_plane_wave(2.0, np.pi / 4, mesh, system.params)
    f0 = plane_wave_trace(2.0, mesh, np.pi / 4)
    for c in range(4):
        assert np.allclose(rhs[c * n:(c + 1) * n], 2.0 * system.params.N[c] * f0[c * n:(c + 1) * n])
    print("  PASS: Dirac system assembly")


def test_muller_baseline_against_disk():
    """Two-density fields match the disk solution."""
    mesh = make_mesh(make_circle(1.0), 32)
    case = CASES["positive"]
    k_minus, direction = 3.0, np.pi / 4
    system = assemble_muller_baseline(k_minus, case.k_hat, case.eps_hat, mesh)
    densities = np.linalg.solve(system.matrix, muller_rhs(system, direction))
    oracle = disk_oracle(1.0, k_minus, case.k_hat, case.eps_hat, direction)
    angles = np.exp(2j * np.pi * (np.arange(12) + 0.25) / 12)
    interior, exterior = 0.5 * angles, 1.8 * angles
    err_in = np.max(np.abs(muller_fields(system, densities, interior, "+", direction)
                           - oracle.evaluate(interior, "+")))
    err_out = np.max(np.abs(muller_fields(system, densities, exterior, "-", direction)
                            - oracle.evaluate(exterior, "-")))
    assert max(err_in, err_out) < 1e-5, f"interior {err_in:.2e}, exterior {err_out:.2e}"
    print("  PASS: two-density baseline vs disk solution")


if __name__ == "__main__":
    print("=== Phase 5: Operators ===")
    test_parameter_identities()
    test_excluded_parameters()
    test_normalization_hook()
    test_well_posedness_table()
    test_wp_region_branches()
    test_figure_eight()
    test_ek_involution()
    test_single_layer_near_circle()
    test_hardy_splitting()
    test_apply_ek_matches_matrix()
    test_system_assembly()
    test_muller_baseline_against_disk()
    print("All Phase 5 tests passed.\n")
