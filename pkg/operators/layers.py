"""
operators/layers.py
===================
Nyström matrices of the two scalar layer-operator families everything
else is built from:

    gradient:   (K^v h)(x) = ∫ ⟨v, ∇Φ_k(y - x)⟩ h(y) dσ(y)
    potential:  (V^a h)(x) = ∫ a Φ_k(y - x) h(y) dσ(y)

where v (a 2-vector stored as a complex number) and a (a scalar) may depend
on the target x, the source y, or both. The S^a operators of the Dirac
system are ik·V^a.

Far pairs use the plain arclength weights. On near links the kernel is
evaluated on the upsampled panel nodes as

    K^v:  -(1/π) Re(W^C v conj(τ')) + ⟨v, ρ⟩ (L W^L + C w)
    V^a:  a (A W^L + B w)

from Φ_k = A log r + B and G_k = -1/(πr²) + L log r + C, using
⟨v, ρ⟩/r² = Re(v/ρ), and folded back onto the 16 panel nodes.
"""

import numpy as np

from core.models import KernelTable, Kernel, LayerInteractions, Mesh
from quadrature.interactions import fold_links, link_values
from specfun.kernels import gradient_factor, gradient_split, phi_radial, phi_split


def kernel_tables(kernel: Kernel, interactions: LayerInteractions) -> KernelTable:
    """
    Evaluate Φ_k and G_k on every pair, and the splits on the near links.

    Node-to-node tables are symmetric in (x, y), so only the strict upper
    triangle is evaluated.
    """
    r = interactions.r
    phi = np.zeros(r.shape, dtype=complex)
    grad = np.zeros(r.shape, dtype=complex)

    if interactions.symmetric:
        iu = np.triu_indices(r.shape[0], 1)
        ru = r[iu]
        phi[iu] = phi_radial(kernel, ru)
        grad[iu] = gradient_factor(kernel, ru)
        phi += phi.T
        grad += grad.T
    else:
        phi[:] = phi_radial(kernel, r)
        grad[:] = gradient_factor(kernel, r)

    A, B = phi_split(kernel, interactions.fine_r)
    L, C = gradient_split(kernel, interactions.fine_r)
    return KernelTable(k=kernel.k, phi=phi, grad=grad,
                       log_phi=A, smooth_phi=B, log_grad=L, smooth_grad=C)


def gradient_operator(v, table: KernelTable, interactions: LayerInteractions,
                      mesh: Mesh) -> np.ndarray:
    """
    Matrix of K^v with v broadcastable to (targets, sources).

    Pass v[:, None] for a target-dependent direction, v[None, :] for a
    source-dependent one.
    """
    rho = interactions.rho
    v = np.asarray(v, dtype=complex)
    matrix = np.real(np.conj(v) * rho) * table.grad * mesh.weights[None, :]

    if interactions.n_links:
        fine = interactions.upsampled
        panels = interactions.near_panels
        vf = link_values(v, interactions)
        dot = np.real(np.conj(vf) * interactions.fine_rho)
        values = (-np.real(interactions.cauchy * vf * np.conj(fine.tau[panels])) / np.pi
                  + dot * (table.log_grad * interactions.log
                           + table.smooth_grad * fine.weights[panels]))
        fold_links(matrix, values, interactions)
    return matrix


def potential_operator(a, table: KernelTable, interactions: LayerInteractions,
                       mesh: Mesh) -> np.ndarray:
    """Matrix of V^a (no ik factor) with a broadcastable to (targets, sources)."""
    a = np.asarray(a)
    matrix = a * table.phi * mesh.weights[None, :]

    if interactions.n_links:
        af = link_values(a, interactions)
        values = af * (table.log_phi * interactions.log
                       + table.smooth_phi * interactions.upsampled.weights[interactions.near_panels])
        fold_links(matrix, values, interactions)
    return matrix
