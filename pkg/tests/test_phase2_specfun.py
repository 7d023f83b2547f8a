"""
tests/test_phase2_specfun.py
============================
Phase 2: Hankel wrapper and the Helmholtz fundamental solution.
Checks reference values, domain errors, the logarithmic splits against
direct evaluation, and the PDEs Φ_k and Ψ_k satisfy away from the origin.
"""

import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np

from clifford.algebra import dirac_apply
from core.exceptions import ParameterError, SpecialFunctionError
from specfun.hankel import hankel1
from specfun.kernels import (SERIES_RADIUS, gradient_factor, gradient_split, grad_phi_k,
                             make_kernel, phi_k, phi_radial, phi_split, psi_k)


def _raises(exc_type, fn, *args):
    try:
        fn(*args)
    except exc_type:
        return True
    return False


def test_hankel_reference_values():
    """H0(1) and H1(1) match tabulated J + iY values."""
    h0 = hankel1(0, 1.0)
    h1 = hankel1(1, 1.0)
    assert abs(h0 - (0.7651976865579666 + 0.08825696421567696j)) < 1e-14, h0
    assert abs(h1 - (0.4400505857449335 - 0.7812128213002887j)) < 1e-14, h1
    print("  PASS: Hankel reference values")


def test_hankel_derivative_relation():
    """H0'(z) = -H1(z) for complex z in the upper half plane."""
    z, h = 3.0 + 0.5j, 1e-5
    fd = (hankel1(0, z + h) - hankel1(0, z - h)) / (2 * h)
    assert abs(fd + hankel1(1, z)) < 1e-9, f"H0' + H1 = {abs(fd + hankel1(1, z)):.2e}"
    print("  PASS: H0' = -H1")


def test_hankel_domain_errors():
    """Order, origin, lower half plane and overflow are rejected."""
    assert _raises(ValueError, hankel1, 2, 1.0)
    assert _raises(SpecialFunctionError, hankel1, 0, 0.0)
    assert _raises(SpecialFunctionError, hankel1, 0, 1.0 - 0.5j)
    assert _raises(SpecialFunctionError, hankel1, 1, 5e3)
    print("  PASS: Hankel domain errors")


def test_hankel_vectorised_shape():
    """Array input keeps its shape; scalar input returns a Python complex."""
    z = np.array([[1.0, 2.0], [3.0 + 1j, 4.0]])
    assert hankel1(0, z).shape == (2, 2)
    assert isinstance(hankel1(0, 2.0), complex)
    print("  PASS: vectorised Hankel")


def test_make_kernel_rejects_excluded_k():
    """k = 0 and Im k < 0 raise ParameterError."""
    assert _raises(ParameterError, make_kernel, 0.0)
    assert _raises(ParameterError, make_kernel, 1.0 - 1.0j)
    print("  PASS: excluded wavenumbers rejected")


def test_phi_split_matches_direct():
    """A log r + B reproduces Φ_k on both sides of the series radius."""
    for k in (5.0, 3.0 + 2.0j):
        kernel = make_kernel(k)
        r = np.array([0.01, 0.1, 0.3, 0.39, 0.41, 2.0])
        A, B = phi_split(kernel, r)
        direct = phi_radial(kernel, r)
        err = np.max(np.abs(A * np.log(r) + B - direct) / np.maximum(1.0, np.abs(direct)))
        assert err < 1e-12, f"k={k}: split error {err:.2e}"
    print("  PASS: Φ_k split")


def test_gradient_split_matches_direct():
    """-1/(πr²) + L log r + C reproduces G_k."""
    for k in (5.0, 3.0 + 2.0j):
        kernel = make_kernel(k)
        r = np.array([0.05, 0.1, 0.3, 0.39, 0.41, 2.0])
        L, C = gradient_split(kernel, r)
        direct = gradient_factor(kernel, r)
        split = -1.0 / (np.pi * r**2) + L * np.log(r) + C
        err = np.max(np.abs(split - direct) / np.maximum(1.0, np.abs(direct)))
        assert err < 1e-11, f"k={k}: gradient split error {err:.2e}"
    print("  PASS: G_k split")


def test_split_continuity_at_series_radius():
    """Series and Hankel branches agree where they meet."""
    kernel = make_kernel(2.0)
    r0 = SERIES_RADIUS / 2.0
    r = np.array([r0 * (1 - 1e-12), r0 * (1 + 1e-12)])
    for split in (phi_split, gradient_split):
        first, second = split(kernel, r)
        assert abs(first[0] - first[1]) < 1e-10 and abs(second[0] - second[1]) < 1e-10
    print("  PASS: split continuity")


def test_split_limits_at_origin():
    """A(0) = -1/π and L(0) = k²/(2π)."""
    k = 4.0 + 1.0j
    kernel = make_kernel(k)
    A, _ = phi_split(kernel, 0.0)
    L, _ = gradient_split(kernel, 0.0)
    assert abs(A[0] + 1.0 / np.pi) < 1e-15
    assert abs(L[0] - k**2 / (2.0 * np.pi)) < 1e-13
    print("  PASS: split limits at r = 0")


def test_phi_solves_helmholtz():
    """(Δ + k²)Φ_k = 0 away from the origin (five-point stencil)."""
    k, h = 2.0, 1e-3
    kernel = make_kernel(k)
    x = 1.0 + 0.5j
    lap = (phi_k(kernel, x + h) + phi_k(kernel, x - h) + phi_k(kernel, x + 1j * h)
           + phi_k(kernel, x - 1j * h) - 4 * phi_k(kernel, x)) / h**2
    residual = abs(lap + k**2 * phi_k(kernel, x))
    assert residual < 1e-4, f"Helmholtz residual {residual:.2e}"
    print("  PASS: Φ_k solves Helmholtz")


def test_grad_phi_matches_differences():
    """grad_phi_k agrees with central differences of phi_k."""
    kernel = make_kernel(3.0 + 0.5j)
    x, h = 0.7 - 0.4j, 1e-6
    grad = grad_phi_k(kernel, x)
    fd = np.array([(phi_k(kernel, x + h) - phi_k(kernel, x - h)) / (2 * h),
                   (phi_k(kernel, x + 1j * h) - phi_k(kernel, x - 1j * h)) / (2 * h)])
    assert np.max(np.abs(grad - fd)) < 1e-7
    print("  PASS: ∇Φ_k")


def test_psi_solves_dirac_equation():
    """(D + ik)Ψ_k = 0 away from the origin."""
    for k in (1.0, 3.0 + 0.5j):
        kernel = make_kernel(k)
        D_psi = dirac_apply(lambda p: psi_k(kernel, p[0] + 1j * p[1]), [0.6, -0.8])
        residual = (D_psi + psi_k(kernel, 0.6 - 0.8j) * (1j * k)).norm()
        assert residual < 1e-5, f"k={k}: (D + ik)Ψ residual {residual:.2e}"
    print("  PASS: (D + ik)Ψ_k = 0")


def test_kernel_singular_point_raises():
    """Φ_k at x = 0 raises SpecialFunctionError."""
    assert _raises(SpecialFunctionError, phi_k, make_kernel(1.0), 0.0)
    print("  PASS: singular point rejected")


if __name__ == "__main__":
    print("=== Phase 2: Special Functions ===")
    test_hankel_reference_values()
    test_hankel_derivative_relation()
    test_hankel_domain_errors()
    test_hankel_vectorised_shape()
    test_make_kernel_rejects_excluded_k()
    test_phi_split_matches_direct()
    test_gradient_split_matches_direct()
    test_split_continuity_at_series_radius()
    test_split_limits_at_origin()
    test_phi_solves_helmholtz()
    test_grad_phi_matches_differences()
    test_psi_solves_dirac_equation()
    test_kernel_singular_point_raises()
    print("All Phase 2 tests passed.\n")
