"""
operators/params.py
===================
Constant diagonal matrices of the Dirac integral equation, the parameter
region where the transmission problem is uniquely solvable, and the
essential-spectrum curve of the double-layer operator on a corner.

2D diagonals (s = (k̂ + |k̂|)^{-1/2}, principal root):

    P  = [s, s, 1/(ε̂+1), 1]
    P' = [s, s, 1, |k̂|/(k̂+|k̂|)]
    N  = [k̂ s, |k̂| s, ε̂/(ε̂+1), 1]
    N' = [|k̂| s, k̂ s, 1, k̂/(k̂+|k̂|)]

with N = PM, N' = (k̂M')P' and P(k̂M' + M)P' = I.
"""

from typing import Callable, Optional

import numpy as np

from core.exceptions import ParameterError
from core.models import DiracParams2D, DiracParams3D

IDENTITY_TOLERANCE = 1e-12
PREDICATE_TOLERANCE = 1e-12

# (k̂, ε̂, M, k̂M') -> (P, P')
Normalization = Callable[[complex, complex, np.ndarray, np.ndarray], tuple]


def _check_k_hat(k_hat: complex) -> complex:
    k_hat = complex(k_hat)
    if k_hat == 0 or (k_hat.imag == 0.0 and k_hat.real < 0.0):
        raise ParameterError(f"k̂ = {k_hat} lies on the excluded ray (-∞, 0]")
    return k_hat


def _check_not_minus_one(value: complex, name: str) -> complex:
    value = complex(value)
    if value == -1.0:
        raise ParameterError(f"{name} = -1 is excluded")
    return value


def default_normalization(k_hat: complex, eps_hat: complex,
                          M: np.ndarray, kM_prime: np.ndarray) -> tuple:
    """The standard (P, P') pair."""
    s = 1.0 / np.sqrt(k_hat + abs(k_hat))
    P = np.array([s, s, 1.0 / (eps_hat + 1.0), 1.0], dtype=complex)
    P_prime = np.array([s, s, 1.0, abs(k_hat) / (k_hat + abs(k_hat))], dtype=complex)
    return P, P_prime


def dirac_params_2d(k_hat: complex, eps_hat: complex,
                    normalization: Optional[Normalization] = None,
                    k_minus: Optional[complex] = None) -> DiracParams2D:
    """
    Build the 2D diagonal matrices for (k̂, ε̂).

    Args:
        k_hat: k₊/k₋, not on (-∞, 0].
        eps_hat: Permittivity ratio, ≠ -1.
        normalization: Alternative (P, P') hook; must satisfy the identity.
        k_minus: Optional exterior wavenumber, stored for convenience.

    Raises:
        ParameterError: On excluded parameters or a normalization that breaks
                        P(k̂M' + M)P' = I.
    """
    k_hat = _check_k_hat(k_hat)
    eps_hat = _check_not_minus_one(eps_hat, "ε̂")

    M = np.array([k_hat, abs(k_hat), eps_hat, 1.0], dtype=complex)
    kM_prime = np.array([abs(k_hat), k_hat, 1.0, k_hat / abs(k_hat)], dtype=complex)
    P, P_prime = (normalization or default_normalization)(k_hat, eps_hat, M, kM_prime)

    params = DiracParams2D(
        k_hat=k_hat,
        eps_hat=eps_hat,
        P=np.asarray(P, dtype=complex),
        P_prime=np.asarray(P_prime, dtype=complex),
        N=np.asarray(P, dtype=complex) * M,
        N_prime=kM_prime * np.asarray(P_prime, dtype=complex),
        M=M,
        kM_prime=kM_prime,
        k_minus=k_minus,
    )
    residual = params.identity_residual()
    if not residual < IDENTITY_TOLERANCE:
        raise ParameterError(
            f"Normalization violates P(k̂M' + M)P' = I (max deviation {residual:.3e})"
        )
    return params


def dirac_params_3d(k_hat: complex, eps_hat: complex) -> DiracParams3D:
    """
    The eight-entry diagonals of the 3D equation, with ĉ = 1/k̂ and
    μ̂ = k̂²/ε̂. Parameter functions only; nothing assembles a 3D operator.

    Raises:
        ParameterError: If k̂ ∈ (-∞, 0], ε̂ ∈ {0, -1} or μ̂ = -1.
    """
    k_hat = _check_k_hat(k_hat)
    eps_hat = _check_not_minus_one(eps_hat, "ε̂")
    if eps_hat == 0:
        raise ParameterError("ε̂ = 0 is excluded in 3D (μ̂ = k̂²/ε̂ undefined)")
    mu_hat = _check_not_minus_one(k_hat**2 / eps_hat, "μ̂")

    c = 1.0 / k_hat
    sc = np.sqrt(c)
    root = np.sqrt(c + abs(c))

    P = np.array([1 / (c + 1), 1 / root, 1 / ((mu_hat + 1) * sc), 1 / ((mu_hat + 1) * sc),
                  abs(c) / (c + abs(c)), eps_hat / (eps_hat + 1), 1, 1], dtype=complex)
    P_prime = np.array([1, 1 / root, 1 / sc, 1 / sc, 1, 1, 1 / (c + 1), 1 / (c + 1)],
                       dtype=complex)
    M = np.array([c, c, k_hat / eps_hat, k_hat / eps_hat, abs(k_hat) / k_hat,
                  1 / eps_hat, 1, 1], dtype=complex)
    kinv_M_prime = np.array([1, abs(c), c, c, 1, 1, c, c], dtype=complex)

    return DiracParams3D(
        k_hat=k_hat,
        eps_hat=eps_hat,
        P=P,
        P_prime=P_prime,
        N=P * M,
        N_prime=kinv_M_prime * P_prime,
        M=M,
        kinv_M_prime=kinv_M_prime,
    )


# ---------------------------------------------------------------------------
# Well-posedness region
# ---------------------------------------------------------------------------

def _phase(k: complex) -> float:
    """φ = |arg(k/i)| ∈ [0, π/2] for Im k ≥ 0."""
    return abs(np.angle(complex(k) / 1j))


def wp_region_contains(z: complex, k_minus: complex, k_plus: complex) -> bool:
    """
    Membership of z in the uniqueness region WP(k₋, k₊).

    With φ± = |arg(k±/i)|:
        φ₊ < π/2, φ₊ + φ₋ > 0:   |arg z| ≤ π - φ₊ - φ₋
        φ₊ = φ₋ = 0:             |arg z| < π
        φ₊ = π/2, 0 < φ₋ ≤ π/2:  min(|arg z|, |arg(-z)|) ≤ π/2 - φ₋
        φ₊ = π/2, φ₋ = 0:        Re z ≠ 0

    Raises:
        ParameterError: On zero arguments or Im k± < 0.
    """
    z, k_minus, k_plus = complex(z), complex(k_minus), complex(k_plus)
    if z == 0 or k_minus == 0 or k_plus == 0:
        raise ParameterError("WP region is defined for nonzero z, k₋, k₊")
    if k_minus.imag < 0 or k_plus.imag < 0:
        raise ParameterError(f"WP region requires Im k± ≥ 0, got k₋={k_minus}, k₊={k_plus}")

    tol = PREDICATE_TOLERANCE
    phi_p, phi_m = _phase(k_plus), _phase(k_minus)
    arg_z = abs(np.angle(z))
    plus_right = abs(phi_p - np.pi / 2) <= tol
    minus_zero = phi_m <= tol

    if plus_right:
        if minus_zero:
            return abs(z.real) > tol * abs(z)
        return min(arg_z, abs(np.angle(-z))) <= np.pi / 2 - phi_m + tol
    if phi_p <= tol and minus_zero:
        return arg_z < np.pi - tol
    return arg_z <= np.pi - phi_p - phi_m + tol


def well_posed(k_minus: complex, k_hat: complex, eps_hat: complex) -> bool:
    """ε̂/k̂ ∈ WP(k₋, k̂k₋)."""
    return wp_region_contains(complex(eps_hat) / complex(k_hat), k_minus, complex(k_hat) * k_minus)


# ---------------------------------------------------------------------------
# Corner spectrum
# ---------------------------------------------------------------------------

def figure_eight(xi, delta: float) -> tuple:
    """
    Both branches ±sin(δπ(1+iξ)/2)/sin(π(1+iξ)/2) of the corner spectrum.

    Raises:
        ParameterError: If |δ| ≥ 1.
    """
    if not abs(delta) < 1.0:
        raise ParameterError(f"Figure-eight parameter must satisfy |δ| < 1, got {delta}")
    w = 1.0 + 1j * np.asarray(xi, dtype=float)
    value = np.sin(delta * np.pi * w / 2.0) / np.sin(np.pi * w / 2.0)
    return value, -value


def figure_eight_delta(opening_angle: float) -> float:
    """δ = θ/π - 1 for a corner of opening angle θ."""
    return float(opening_angle) / np.pi - 1.0
