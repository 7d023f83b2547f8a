"""
operators/muller.py
===================
Classical two-density transmission system, kept as an independent
cross-check of the Dirac formulation.

Unknowns are the interior traces φ = u⁺ and ψ = ∂_ν u⁺. With S, K, K', T the
single, double, adjoint double and hypersingular operators for the kernel
Φ_k (so that interior Green representation reads u = ½(S̃ψ - K̃φ)):

    φ + (K₊ - ε̂K₋)φ/(ε̂+1) + (S₋ - S₊)ψ/(ε̂+1)     = 2ε̂ u⁰/(ε̂+1)
    ψ + (K'₋ - ε̂K'₊)ψ/(ε̂+1) + ε̂(T₊ - T₋)φ/(ε̂+1)  = 2ε̂ ∂_ν u⁰/(ε̂+1)

The 1/r² parts of T₊ and T₋ cancel in the difference, leaving a log-type
kernel that the same product integration handles.
"""

import logging

import numpy as np

from core.exceptions import ParameterError, RegionError
from core.models import LayerInteractions, Mesh, MullerSystem
from geometry.mesh import winding_number
from operators.cauchy import unit_direction
from operators.layers import gradient_operator, kernel_tables, potential_operator
from quadrature.interactions import boundary_interactions, field_interactions, fold_links
from specfun.kernels import make_kernel

logger = logging.getLogger(__name__)


def _hypersingular_difference(tables: tuple, interactions: LayerInteractions,
                              mesh: Mesh) -> np.ndarray:
    """Nyström matrix of T₊ - T₋ on node targets."""
    plus, minus = tables
    k_plus2, k_minus2 = plus.k**2, minus.k**2
    rho, r = interactions.rho, interactions.r

    nu_x, nu_y = mesh.nu[:, None], mesh.nu[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.real(np.conj(nu_x) * rho) * np.real(np.conj(nu_y) * rho) / r**2
    c[r == 0.0] = 0.0
    nn = np.real(np.conj(nu_x) * nu_y)

    dG = plus.grad - minus.grad
    kernel = (k_plus2 * plus.phi - k_minus2 * minus.phi + 2.0 * dG) * c - dG * nn
    matrix = kernel * mesh.weights[None, :]

    if interactions.n_links:
        fine = interactions.upsampled
        panels = interactions.near_panels
        rho_f = interactions.fine_rho
        nu_xf = mesh.nu[interactions.near_targets][:, None]
        nu_yf = fine.nu[panels]
        cn = np.real(np.conj(nu_xf) * rho_f) * np.real(np.conj(nu_yf) * rho_f) / interactions.fine_r**2
        nnn = np.real(np.conj(nu_xf) * nu_yf)
        dL = plus.log_grad - minus.log_grad
        dC = plus.smooth_grad - minus.smooth_grad
        log_coeff = (k_plus2 * plus.log_phi - k_minus2 * minus.log_phi + 2.0 * dL) * cn - dL * nnn
        smooth = (k_plus2 * plus.smooth_phi - k_minus2 * minus.smooth_phi + 2.0 * dC) * cn - dC * nnn
        fold_links(matrix, log_coeff * interactions.log + smooth * fine.weights[panels], interactions)
    return matrix


def assemble_muller_baseline(k_minus: complex, k_hat: complex, eps_hat: complex,
                             mesh: Mesh) -> MullerSystem:
    """
    Assemble the 2N x 2N two-density system.

    Raises:
        ParameterError: If ε̂ = -1 or a wavenumber is excluded.
    """
    eps_hat = complex(eps_hat)
    if eps_hat == -1.0:
        raise ParameterError("ε̂ = -1 is excluded")
    k_minus = complex(k_minus)
    k_plus = complex(k_hat) * k_minus

    interactions = boundary_interactions(mesh)
    plus = kernel_tables(make_kernel(k_plus), interactions)
    minus = kernel_tables(make_kernel(k_minus), interactions)

    nu_src, nu_tgt = mesh.nu[None, :], mesh.nu[:, None]
    K_plus = gradient_operator(nu_src, plus, interactions, mesh)
    K_minus = gradient_operator(nu_src, minus, interactions, mesh)
    Kp_plus = -gradient_operator(nu_tgt, plus, interactions, mesh)
    Kp_minus = -gradient_operator(nu_tgt, minus, interactions, mesh)
    S_plus = potential_operator(1.0, plus, interactions, mesh)
    S_minus = potential_operator(1.0, minus, interactions, mesh)
    dT = _hypersingular_difference((plus, minus), interactions, mesh)

    n = mesh.n_nodes
    scale = 1.0 / (eps_hat + 1.0)
    matrix = np.empty((2 * n, 2 * n), dtype=complex)
    matrix[:n, :n] = scale * (K_plus - eps_hat * K_minus)
    matrix[:n, n:] = scale * (S_minus - S_plus)
    matrix[n:, :n] = scale * eps_hat * dT
    matrix[n:, n:] = scale * (Kp_minus - eps_hat * Kp_plus)
    matrix[np.diag_indices(2 * n)] += 1.0

    logger.info("Assembled two-density system: %d unknowns", 2 * n)
    return MullerSystem(mesh=mesh, k_minus=k_minus, k_hat=complex(k_hat), eps_hat=eps_hat,
                        matrix=matrix, metadata={"n_nodes": n, "n_unknowns": 2 * n})


def _incident(k_minus: complex, direction, mesh: Mesh) -> tuple:
    d = unit_direction(direction)
    u0 = np.exp(1j * k_minus * np.real(np.conj(d) * mesh.z))
    return u0, 1j * k_minus * np.real(np.conj(d) * mesh.nu) * u0


def muller_rhs(system: MullerSystem, direction) -> np.ndarray:
    """Right-hand side 2ε̂/(ε̂+1) [u⁰, ∂_ν u⁰] for a plane wave."""
    u0, du0 = _incident(system.k_minus, direction, system.mesh)
    return (2.0 * system.eps_hat / (system.eps_hat + 1.0)) * np.concatenate([u0, du0])


def muller_fields(system: MullerSystem, densities: np.ndarray, points, side: str,
                  direction) -> np.ndarray:
    """
    Field from the two densities at off-curve points.

    Args:
        system: Assembled system.
        densities: Solution [φ, ψ].
        points: Complex points, all in the region named by side.
        side: "+" for the interior field u⁺, "-" for the scattered field u⁻.
        direction: Incidence direction used for the right-hand side.

    Raises:
        RegionError: If a point is not in the requested region.
    """
    mesh = system.mesh
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    expected = {"+": 1, "-": 0}.get(side)
    if expected is None:
        raise ValueError(f"side must be '+' or '-', got '{side}'")
    if points.size and np.any(np.rint(winding_number(mesh, points)) != expected):
        raise RegionError(f"Points outside the {'interior' if side == '+' else 'exterior'} region")

    n = mesh.n_nodes
    phi, psi = densities[:n], densities[n:]
    interactions = field_interactions(mesh, points)
    k = system.k_plus if side == "+" else system.k_minus
    table = kernel_tables(make_kernel(k), interactions)
    S = potential_operator(1.0, table, interactions, mesh)
    K = gradient_operator(mesh.nu[None, :], table, interactions, mesh)

    if side == "+":
        return 0.5 * (S @ psi - K @ phi)
    u0, du0 = _incident(system.k_minus, direction, mesh)
    return -0.5 * (S @ (psi / system.eps_hat - du0) - K @ (phi - u0))
