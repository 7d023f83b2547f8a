"""
operators/system.py
===================
Assembly of the 2D Dirac transmission system

    (I + P E_{k+} N' - N E_{k-} P') h = 2 N f⁰

and its plane-wave right-hand side f⁰ = [ik₋u⁰, 0, ∂_ν u⁰, ∂_τ u⁰].

The diagonal matrices are constant over the boundary, so each of the
sixteen N x N blocks is a linear combination of the matching blocks of
E_{k+} and E_{k-}:

    A[i, j] = δ_ij I + P_i N'_j E_{k+}[i, j] - N_i P'_j E_{k-}[i, j]

Inputs:  Mesh, (k₋, k̂, ε̂)
Outputs: DiracSystem (consumed by solver/ and fields/)
"""

import logging
import time
from typing import Optional

import numpy as np

from core.models import DiracParams2D, DiracSystem, Mesh
from operators.cauchy import EK_LAYOUT, ek_blocks, plane_wave_trace
from operators.params import Normalization, dirac_params_2d

logger = logging.getLogger(__name__)


def assemble_dirac_system(k_minus: complex, k_hat: complex, eps_hat: complex, mesh: Mesh,
                          keep_blocks: bool = False,
                          normalization: Optional[Normalization] = None) -> DiracSystem:
    """
    Assemble the Dirac system matrix on a mesh.

    Args:
        k_minus: Exterior wavenumber (Im ≥ 0, ≠ 0).
        k_hat: k₊/k₋; k₊ = k̂k₋ must have Im ≥ 0.
        eps_hat: Permittivity ratio.
        mesh: Boundary mesh.
        keep_blocks: Keep the E_{k±} blocks for boundary traces.
        normalization: Optional alternative (P, P') hook.

    Returns:
        DiracSystem with the 4N x 4N matrix.

    Raises:
        ParameterError: On excluded parameters or wavenumbers.
    """
    start = time.perf_counter()
    k_minus = complex(k_minus)
    params = dirac_params_2d(k_hat, eps_hat, normalization=normalization, k_minus=k_minus)
    k_plus = params.k_hat * k_minus

    plus = ek_blocks(k_plus, mesh)
    minus = ek_blocks(k_minus, mesh)

    n = mesh.n_nodes
    matrix = np.zeros((4 * n, 4 * n), dtype=complex)
    for row, col, sign, name in EK_LAYOUT:
        block = matrix[row * n:(row + 1) * n, col * n:(col + 1) * n]
        block += (sign * params.P[row] * params.N_prime[col]) * plus[name]
        block -= (sign * params.N[row] * params.P_prime[col]) * minus[name]
    matrix[np.diag_indices(4 * n)] += 1.0

    elapsed = time.perf_counter() - start
    logger.info("Assembled Dirac system: %d unknowns, k- = %s, k+ = %s (%.2f s)",
                4 * n, k_minus, k_plus, elapsed)

    return DiracSystem(
        mesh=mesh,
        k_minus=k_minus,
        params=params,
        matrix=matrix,
        metadata={"n_nodes": n, "n_unknowns": 4 * n, "k_plus": k_plus,
                  "assembly_seconds": elapsed},
        blocks_plus=plus if keep_blocks else None,
        blocks_minus=minus if keep_blocks else None,
    )


def incident_trace(k_minus: complex, direction, mesh: Mesh) -> np.ndarray:
    """f⁰ = [ik₋u⁰, 0, ∂_ν u⁰, ∂_τ u⁰] for u⁰ = exp(ik₋ d·x)."""
    return plane_wave_trace(k_minus, mesh, direction)


def rhs_plane_wave(k_minus: complex, direction, mesh: Mesh, params: DiracParams2D) -> np.ndarray:
    """Right-hand side 2 N f⁰ of the Dirac system."""
    f0 = incident_trace(k_minus, direction, mesh)
    return 2.0 * np.repeat(params.N, mesh.n_nodes) * f0
