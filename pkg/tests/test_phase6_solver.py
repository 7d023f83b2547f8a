"""
tests/test_phase6_solver.py
===========================
Phase 6: Direct and iterative solvers, condition sweeps and homotopy.
Small dense systems with known answers; one short sweep on a coarse disk.
"""

import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np

from core.exceptions import ConvergenceError, HomotopyError, ParameterError, SingularMatrixError
from geometry.curves import make_circle
from geometry.mesh import make_mesh
from operators.system import assemble_dirac_system, rhs_plane_wave
from simulation.scenarios import CASES
from solver.direct import condition_estimate, condition_number, solve_direct
from solver.gmres import EPS, _stalled, gmres
from solver.homotopy import homotopy_solve
from solver.sweep import (exterior_wavenumber, flag_resonances, refine_resonance, sample_grid,
                          sweep)


def _random_system(n, seed=0):
    rng = np.random.default_rng(seed)
    A = np.eye(n) + 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    return A, b


def test_solve_direct():
    """LU solve matches numpy; shape errors raise ValueError."""
    A, b = _random_system(40)
    x = solve_direct(A, b)
    assert np.max(np.abs(x - np.linalg.solve(A, b))) < 1e-12
    for bad in ((A[:, :39], b), (A, b[:39])):
        try:
            solve_direct(*bad)
        except ValueError:
            continue
        raise AssertionError("Expected ValueError for mismatched shapes")
    print("  PASS: direct solve")


def test_singular_matrix():
    """A rank-one matrix raises SingularMatrixError with a σ_min estimate."""
    try:
        solve_direct(np.ones((3, 3), dtype=complex), np.ones(3))
    except SingularMatrixError as exc:
        assert exc.sigma_min >= 0.0
        print("  PASS: singular matrix detected")
        return
    raise AssertionError("Expected SingularMatrixError")


def test_condition_estimate():
    """Seeded estimate agrees with the exact SVD to 1%."""
    n = 50
    rng = np.random.default_rng(1)
    U, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    A = U @ np.diag(np.logspace(0, -3, n)) @ V.conj().T

    exact, smin, smax, method = condition_estimate(A)
    assert method == "svd" and abs(exact - 1e3) < 1e-6 * 1e3
    assert abs(smin - 1e-3) < 1e-12 and abs(smax - 1.0) < 1e-12
    estimate, _, _, method = condition_estimate(A, seed=3, svd_limit=10)
    assert method == "estimate"
    assert abs(estimate - exact) / exact < 1e-2, f"estimate {estimate:.4e} vs {exact:.4e}"
    assert abs(condition_number(np.eye(5)) - 1.0) < 1e-15
    print("  PASS: condition number estimate")


def test_gmres_matches_direct():
    """GMRES agrees with LU; residuals decrease."""
    A, b = _random_system(60, seed=2)
    history = []
    x, iterations = gmres(A, b, tol=1e-13, callback=lambda k, r: history.append(r))
    assert np.max(np.abs(x - solve_direct(A, b))) < 1e-11
    assert 0 < iterations <= 60 and len(history) == iterations
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(history, history[1:]))
    print("  PASS: GMRES vs direct solve")


def test_gmres_edge_cases():
    """Tolerance below eps raises; zero rhs returns zeros; capped runs raise with the best iterate."""
    A, b = _random_system(30, seed=5)
    try:
        gmres(A, b, tol=EPS / 2)
    except ValueError:
        pass
    else:
        raise AssertionError("Expected ValueError for tol < eps")

    x, iterations = gmres(A, np.zeros(30))
    assert iterations == 0 and not np.any(x)

    try:
        gmres(A, b, max_iter=3)
    except ConvergenceError as exc:
        assert exc.best is not None and exc.iterations == 3 and len(exc.residuals) == 3
    else:
        raise AssertionError("Expected ConvergenceError")

    x0 = solve_direct(A, b)
    _, warm = gmres(A, b, tol=1e-10, x0=x0)
    assert warm == 0
    print("  PASS: GMRES edge cases")


def test_gmres_callable_operator():
    """A matrix-free operator gives the same answer."""
    A, b = _random_system(20, seed=6)
    x, _ = gmres(lambda v: A @ v, b, tol=1e-12)
    assert np.max(np.abs(A @ x - b)) < 1e-10
    print("  PASS: matrix-free GMRES")


def test_sample_grid():
    """Samples kmin + (kmax - kmin)j/n exclude kmin."""
    assert np.allclose(sample_grid((0.0, 20.0), 4), [5.0, 10.0, 15.0, 20.0])
    for bad in (((5.0, 1.0), 4), ((0.0, 1.0), 0), ((-1.0, 1.0), 4)):
        try:
            sample_grid(*bad)
        except ValueError:
            continue
        raise AssertionError(f"Expected ValueError for {bad}")
    print("  PASS: sample grid")


def test_flag_resonances():
    """A spike is flagged, a flat or gently varying series is not."""
    spike = np.ones(21)
    spike[10] = 100.0
    flags = flag_resonances(spike)
    assert flags[10] and sum(flags) == 1
    assert not any(flag_resonances(np.linspace(1.0, 5.0, 30)))
    assert flag_resonances([7.0]) == [False]
    print("  PASS: resonance flags")


def test_exterior_wavenumber():
    """k_plus cases convert the swept k₊ to k₋ = k₊/k̂."""
    reverse = CASES["reverse-plasmonic"]
    assert abs(exterior_wavenumber(reverse, 2.0) - 2.0 / reverse.k_hat) < 1e-15
    assert exterior_wavenumber(CASES["positive"], 2.0) == 2.0
    print("  PASS: exterior wavenumber")


def test_small_sweep():
    """Coarse positive-dielectric sweep: finite condition numbers, no flags."""
    mesh = make_mesh(make_circle(1.0), 4)
    result = sweep(CASES["positive"], mesh, k_range=(0.0, 2.0), n_samples=4,
                   with_gmres=True, workers=2)
    assert len(result.records) == 4
    assert [r.k_minus for r in result.records] == [0.5, 1.0, 1.5, 2.0]
    assert all(np.isfinite(r.cond_2) and r.cond_2 >= 1.0 for r in result.records)
    assert all(r.gmres_iters is not None and 0 < r.gmres_iters < 4 * mesh.n_nodes
               for r in result.records)
    assert result.n_flags == 0 and result.flagged == []
    print("  PASS: small sweep")


def test_refine_resonance():
    """Peak refinement stays inside its bracket and marks the record."""
    mesh = make_mesh(make_circle(1.0), 4)
    record = refine_resonance(CASES["positive"], mesh, (1.0, 1.5), xatol=1e-3)
    assert record.refined and 1.0 <= record.k_minus.real <= 1.5
    assert np.isfinite(record.cond_2) and record.cond_2 >= 1.0
    print("  PASS: resonance refinement")


def test_homotopy_limit():
    """A path linear in ε̂ extrapolates exactly to the target."""
    def builder(eps):
        return np.eye(2, dtype=complex), np.array([1.0, eps])

    result = homotopy_solve(builder, -2.0, delta0=0.1, ratio=0.1, steps=6)
    assert abs(result.solution[1] + 2.0) < 1e-14, result.solution
    assert result.converged and len(result.deltas) == 6
    assert all(d > 0 for d in result.differences)
    print("  PASS: homotopy limit")


def test_homotopy_divergence():
    """A pole at the target makes the probe differences grow."""
    def builder(eps):
        return np.eye(2, dtype=complex), np.array([1.0, 1.0 / (eps + 2.0)])

    try:
        homotopy_solve(builder, -2.0, solver="direct")
    except HomotopyError as exc:
        assert exc.differences[-1] > exc.differences[0]
        assert exc.best is not None
    else:
        raise AssertionError("Expected HomotopyError")
    print("  PASS: homotopy divergence detected")


def test_homotopy_rejects_bad_target():
    """Non-negative or complex targets raise ParameterError."""
    builder = lambda eps: (np.eye(1), np.array([eps]))
    for target in (2.0, -1.0 + 0.5j):
        try:
            homotopy_solve(builder, target)
        except ParameterError:
            continue
        raise AssertionError(f"Expected ParameterError for {target}")
    print("  PASS: homotopy target checks")


def _disk_builder(mesh, k_minus, k_hat):
    def builder(eps):
        system = assemble_dirac_system(k_minus, k_hat, eps, mesh)
        return system.matrix, rhs_plane_wave(k_minus, 0.3, mesh, system.params)
    return builder


def test_gmres_dirac_disk():
    """Default-tolerance GMRES on a Dirac disk system stops early and matches LU."""
    mesh = make_mesh(make_circle(1.0), 16)
    case = CASES["positive"]
    system = assemble_dirac_system(5.0, case.k_hat, case.eps_hat, mesh)
    rhs = rhs_plane_wave(5.0, np.pi / 4, mesh, system.params)
    history = []
    h, iterations = gmres(system, rhs, callback=lambda k, r: history.append(r))
    n = system.n_unknowns
    assert iterations < n // 4, f"{iterations} iterations for {n} unknowns"
    assert history[-1] < 1e-14, history[-1]
    assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(history, history[1:]))
    h_direct = solve_direct(system, rhs)
    assert np.max(np.abs(h - h_direct)) < 1e-10 * np.max(np.abs(h_direct))
    print("  PASS: GMRES on the Dirac disk system")


def test_gmres_stall_stop():
    """A residual sitting at machine precision ends the run; one still falling does not."""
    assert _stalled([1e-3, 1e-8, 3e-16, 2.5e-16, 2.4e-16, 2.4e-16])
    assert not _stalled([1e-3, 1e-8, 1e-12, 1e-14, 1e-15])
    assert not _stalled([1e-3, 1e-3, 1e-3, 1e-3, 1e-3])
    assert not _stalled([2.4e-16, 2.4e-16])
    print("  PASS: GMRES stall stop")


def test_homotopy_matches_direct():
    """The ε̂ = -5 limit agrees with a direct solve at the target."""
    mesh = make_mesh(make_circle(1.0), 16)
    k_hat = 1j * np.sqrt(5.0)
    builder = _disk_builder(mesh, 1.0, k_hat)
    result = homotopy_solve(builder, -5.0, delta0=0.1, ratio=0.1, steps=6, solver="direct")
    matrix, rhs = builder(-5.0 + 0j)
    h_direct = solve_direct(matrix, rhs)
    error = np.max(np.abs(result.solution - h_direct)) / np.max(np.abs(h_direct))
    assert error < 1e-8, error
    assert result.converged
    print("  PASS: homotopy limit vs direct solve")


def test_plasmonic_homotopy_contracts():
    """Probe differences shrink at least 5x per decade of δ on the plasmonic disk."""
    mesh = make_mesh(make_circle(1.0), 16)
    case = CASES["plasmonic"]
    result = homotopy_solve(_disk_builder(mesh, 1.0, case.k_hat), case.eps_hat.real,
                            delta0=0.1, ratio=0.1, steps=5, solver="direct")
    floor = 1e4 * EPS * np.max(np.abs(result.probe_values[-1]))
    d = result.differences
    assert len(d) == 4 and d[0] > floor
    assert all(prev >= 5.0 * cur for prev, cur in zip(d, d[1:]) if cur > floor), d
    assert result.converged
    print("  PASS: plasmonic homotopy contraction")



if __name__ == "__main__":
    print("=== Phase 6: Solvers ===")
    test_solve_direct()
    test_singular_matrix()
    test_condition_estimate()
    test_gmres_matches_direct()
    test_gmres_edge_cases()
    test_gmres_callable_operator()
    test_sample_grid()
    test_flag_resonances()
    test_exterior_wavenumber()
    test_small_sweep()
    test_refine_resonance()
    test_homotopy_limit()
    test_homotopy_divergence()
    test_homotopy_rejects_bad_target()
    test_gmres_dirac_disk()
    test_gmres_stall_stop()
    test_homotopy_matches_direct()
    test_plasmonic_homotopy_contracts()
    print("All Phase 6 tests passed.\n")
