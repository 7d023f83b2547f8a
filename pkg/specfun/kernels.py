"""
specfun/kernels.py
==================
Helmholtz fundamental solution in the plane and its logarithmic splits.

With the normalisation (Δ + k²)Φ_k = -2δ:

    Φ_k(x)  = (i/2) H0(k|x|)
    ∇Φ_k(x) = G_k(|x|) x,      G_k(r) = -(i/2) k H1(kr) / r
    Ψ_k(x)  = -(∇Φ_k(x) - ik Φ_k(x)) / 2

The product-integration quadrature needs the singular behaviour pulled out
explicitly:

    Φ_k = A log r + B,                    A = -J0(kr)/π
    G_k = -1/(π r²) + L log r + C,        L = k J1(kr)/(π r)

with A, B, L, C even entire functions of r. For |kr| ≤ 2 they are summed
from their power series in w = (kr/2)²; beyond that they are recovered
from Hankel differences, where the subtraction is harmless.

Points and 2-vectors are complex numbers x1 + i x2. Gradients of the
complex-valued Φ_k are returned as (..., 2) arrays.
"""

import logging
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial
from scipy import special

from clifford.algebra import vector, scalar
from core.exceptions import ParameterError, SpecialFunctionError
from core.models import Kernel, Multivector
from specfun.hankel import bessel_j, hankel1

logger = logging.getLogger(__name__)

SERIES_TERMS = 30
SERIES_RADIUS = 2.0


# ---------------------------------------------------------------------------
# Kernel construction
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _series_tables() -> tuple:
    """k-independent series coefficients, m = 0 .. SERIES_TERMS-1."""
    m = np.arange(SERIES_TERMS)
    fact = special.factorial(m, exact=False)
    fact_next = special.factorial(m + 1, exact=False)
    sign = (-1.0) ** m
    j0 = sign / fact**2
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / m[1:])])
    j1 = sign / (fact * fact_next)
    digamma = special.digamma(m + 1.0) + special.digamma(m + 2.0)
    return j0, j0 * harmonic, j1, j1 * digamma


def make_kernel(k: complex) -> Kernel:
    """
    Build the Kernel for wavenumber k.

    Raises:
        ParameterError: If k == 0 or Im k < 0.
    """
    k = complex(k)
    if k == 0:
        raise ParameterError("Wavenumber k = 0 is excluded (use a small nonzero k for the static limit)")
    if k.imag < -1e-14 * abs(k):
        raise ParameterError(f"Wavenumber {k} has Im k < 0; radiating kernels need Im k ≥ 0")

    j0, j0_harmonic, j1, j1_digamma = _series_tables()
    log_half_k = np.log(k / 2.0)
    smooth_const = 0.5j - (log_half_k + np.euler_gamma) / np.pi

    return Kernel(
        k=k,
        log_half_k=complex(log_half_k),
        phi_log_coeffs=-j0 / np.pi + 0j,
        phi_smooth_coeffs=smooth_const * j0 + j0_harmonic / np.pi,
        grad_log_coeffs=(k**2 / (2.0 * np.pi)) * j1,
        grad_smooth_coeffs=0.5 * k**2 * (
            (log_half_k / np.pi - 0.5j) * j1 - j1_digamma / (2.0 * np.pi)
        ),
    )


# ---------------------------------------------------------------------------
# Radial kernels
# ---------------------------------------------------------------------------

def phi_radial(kernel: Kernel, r: np.ndarray) -> np.ndarray:
    """Φ_k as a function of r > 0."""
    return 0.5j * hankel1(0, kernel.k * np.asarray(r))


def gradient_factor(kernel: Kernel, r: np.ndarray) -> np.ndarray:
    """G_k(r) with ∇Φ_k(x) = G_k(|x|) x, for r > 0."""
    r = np.asarray(r, dtype=float)
    return -0.5j * kernel.k * hankel1(1, kernel.k * r) / r


def phi_split(kernel: Kernel, r: np.ndarray) -> tuple:
    """
    (A, B) with Φ_k(r) = A(r) log r + B(r), valid for r ≥ 0.

    At r = 0: A = -1/π and B = i/2 - (log(k/2) + γ)/π.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    A = np.empty(r.shape, dtype=complex)
    B = np.empty(r.shape, dtype=complex)
    series = np.abs(kernel.k * r) <= SERIES_RADIUS

    w = kernel.series_argument(r[series])
    A[series] = polynomial.polyval(w, kernel.phi_log_coeffs)
    B[series] = polynomial.polyval(w, kernel.phi_smooth_coeffs)

    far = ~series
    if np.any(far):
        rf = r[far]
        A[far] = -bessel_j(0, kernel.k * rf) / np.pi
        B[far] = phi_radial(kernel, rf) - A[far] * np.log(rf)
    return A, B


def gradient_split(kernel: Kernel, r: np.ndarray) -> tuple:
    """
    (L, C) with G_k(r) = -1/(π r²) + L(r) log r + C(r), valid for r ≥ 0.

    At r = 0: L = k²/(2π) and C = (k²/2)[(log(k/2) + γ)/π - i/2 - 1/(2π)].
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    L = np.empty(r.shape, dtype=complex)
    C = np.empty(r.shape, dtype=complex)
    series = np.abs(kernel.k * r) <= SERIES_RADIUS

    w = kernel.series_argument(r[series])
    L[series] = polynomial.polyval(w, kernel.grad_log_coeffs)
    C[series] = polynomial.polyval(w, kernel.grad_smooth_coeffs)

    far = ~series
    if np.any(far):
        rf = r[far]
        L[far] = kernel.k * bessel_j(1, kernel.k * rf) / (np.pi * rf)
        C[far] = gradient_factor(kernel, rf) + 1.0 / (np.pi * rf**2) - L[far] * np.log(rf)
    return L, C


# ---------------------------------------------------------------------------
# Point kernels
# ---------------------------------------------------------------------------

def _radius(x) -> np.ndarray:
    r = np.abs(np.asarray(x, dtype=complex))
    if np.any(r == 0.0):
        raise SpecialFunctionError("Fundamental solution evaluated at its singularity x = 0")
    return r


def phi_k(kernel: Kernel, x):
    """Φ_k(x) = (i/2) H0(k|x|) for complex points x ≠ 0."""
    return phi_radial(kernel, _radius(x))


def grad_phi_k(kernel: Kernel, x) -> np.ndarray:
    """
    ∇Φ_k(x) for complex points x ≠ 0.

    Returns:
        Complex array of shape (..., 2) holding (∂1Φ_k, ∂2Φ_k).
    """
    x = np.asarray(x, dtype=complex)
    g = gradient_factor(kernel, _radius(x))
    return np.stack([g * x.real, g * x.imag], axis=-1)


def psi_k(kernel: Kernel, x: complex) -> Multivector:
    """Ψ_k(x) = -(∇Φ_k(x) - ik Φ_k(x))/2 as a grade 0+1 multivector."""
    grad = grad_phi_k(kernel, complex(x))
    phi = phi_k(kernel, complex(x))
    return scalar(2, 0.5j * kernel.k * phi) + vector(2, -0.5 * grad)
