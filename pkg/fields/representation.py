"""
fields/representation.py
========================
Fields and boundary traces from a solved Dirac density.

The density h gives the traces h⁺ = N'h (interior, wavenumber k₊) and
h⁻ = P'h (scattered exterior, wavenumber k₋). Off the curve

    U   = (1/2ik) [ -K^{ν'} h₁ - K^{τ'} h₂ + S^1 h₃ ]
    ∇U  = ½ [ S^{ν'} h₁ + S^{τ'} h₂ - K^{I} h₃ - K^{J} h₄ ]

with S^a = ik V^a. The gradient is taken one Cartesian direction e at a
time: its e-component is ½[S^{⟨e,ν'⟩}h₁ + S^{⟨e,τ'⟩}h₂ - K^{e}h₃ + K^{ie}h₄].
On the curve the one-sided limits are the Cauchy projections
E⁺h⁺ = ½(I + E_{k₊})h⁺ and -E⁻h⁻ = ½(E_{k₋} - I)h⁻. The transmission residual
instead takes the limits of U± and ∂_ν U± along the normal.
"""

import logging

import numpy as np

from core.exceptions import RegionError
from core.models import (DiracParams2D, DiracSystem, Mesh, REGION_BOUNDARY, REGION_EXTERIOR,
                         REGION_INTERIOR)
from geometry.mesh import boundary_distance, winding_number
from operators.cauchy import apply_ek, ek_blocks, unit_direction
from operators.layers import gradient_operator, kernel_tables, potential_operator
from quadrature.interactions import ON_CURVE_TOLERANCE, field_interactions, gauss_integral
from specfun.kernels import make_kernel

logger = logging.getLogger(__name__)

SIDES = {"+": REGION_INTERIOR, "-": REGION_EXTERIOR}

RESIDUAL_SAMPLES = 360
LIMIT_OFFSET = 1e-3                                  # fraction of the shortest panel
LIMIT_WEIGHTS = np.array([4.0, -6.0, 4.0, -1.0])     # cubic extrapolation from j = 1..4 to 0


def traces_from_density(h: np.ndarray, params: DiracParams2D) -> tuple:
    """
    (h⁺, h⁻) = (N'h, P'h), applied componentwise per node.

    Raises:
        ValueError: If len(h) is not a multiple of 4.
    """
    h = np.asarray(h)
    if h.shape[0] % 4:
        raise ValueError(f"Density length {h.shape[0]} is not a multiple of 4")
    n = h.shape[0] // 4
    return np.repeat(params.N_prime, n) * h, np.repeat(params.P_prime, n) * h


# ---------------------------------------------------------------------------
# Region tagging
# ---------------------------------------------------------------------------

def tag_points(mesh: Mesh, points) -> tuple:
    """
    Region tag and collar mask for each point.

    Points within one panel length of the curve are in the collar and are
    re-tagged with the quadrature winding number of the discretised curve,
    which is the geometry the representation formulas see.

    Returns:
        (region, collar): region in {REGION_INTERIOR, REGION_EXTERIOR,
        REGION_BOUNDARY}, collar a bool mask.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    if points.size == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=bool)
    winding = winding_number(mesh, points)
    region = np.where(np.rint(winding) == 1, REGION_INTERIOR, REGION_EXTERIOR)

    distance, _, panel_length = boundary_distance(mesh, points)
    scale = max(1.0, float(np.max(np.abs(mesh.z))))
    on_curve = distance <= ON_CURVE_TOLERANCE * scale
    collar = distance < panel_length

    refine = collar & ~on_curve
    if np.any(refine):
        inside = gauss_integral(mesh, points[refine]) > np.pi
        region[refine] = np.where(inside, REGION_INTERIOR, REGION_EXTERIOR)
    region[on_curve] = REGION_BOUNDARY
    return region, collar


def _check_side(mesh: Mesh, points: np.ndarray, side: str) -> None:
    expected = SIDES.get(side)
    if expected is None:
        raise ValueError(f"side must be '+' or '-', got '{side}'")
    region, _ = tag_points(mesh, points)
    if np.any(region == REGION_BOUNDARY):
        raise RegionError("Field points on the curve; use boundary_traces()")
    if np.any(region != expected):
        bad = points[np.argmax(region != expected)]
        name = "interior" if side == "+" else "exterior"
        raise RegionError(f"Point {bad} is not in the {name} region")


# ---------------------------------------------------------------------------
# Off-curve fields
# ---------------------------------------------------------------------------

def _split(h_pm: np.ndarray, mesh: Mesh) -> np.ndarray:
    h_pm = np.asarray(h_pm, dtype=complex)
    if h_pm.shape[0] != 4 * mesh.n_nodes:
        raise ValueError(f"Density length {h_pm.shape[0]} does not match 4 x {mesh.n_nodes} nodes")
    return h_pm.reshape(4, mesh.n_nodes)


def eval_U(h_pm: np.ndarray, k_pm: complex, mesh: Mesh, points, side: str = "+",
           check_region: bool = True) -> np.ndarray:
    """
    U± at off-curve points from the one-sided density h± and wavenumber k±.

    Args:
        h_pm: h⁺ or h⁻, length 4N.
        k_pm: k₊ for side "+", k₋ for side "-".
        mesh: Boundary mesh.
        points: Complex points, all strictly inside the region named by side.
        side: "+" (interior) or "-" (exterior).
        check_region: Skip the region test when the caller has tagged points.

    Raises:
        RegionError: If a point is on the curve or in the other region.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    h1, h2, h3, _ = _split(h_pm, mesh)
    if check_region:
        _check_side(mesh, points, side)
    kernel = make_kernel(k_pm)
    interactions = field_interactions(mesh, points)
    table = kernel_tables(kernel, interactions)

    K_nu = gradient_operator(mesh.nu[None, :], table, interactions, mesh)
    K_tau = gradient_operator(mesh.tau[None, :], table, interactions, mesh)
    V = potential_operator(1.0, table, interactions, mesh)
    return (-(K_nu @ h1) - K_tau @ h2) / (2j * kernel.k) + 0.5 * (V @ h3)


def eval_gradU(h_pm: np.ndarray, k_pm: complex, mesh: Mesh, points, side: str = "+",
               check_region: bool = True) -> np.ndarray:
    """
    ∇U± at off-curve points, shape (m, 2) with columns (∂x U, ∂y U).

    Same arguments and errors as eval_U.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    h1, h2, h3, h4 = _split(h_pm, mesh)
    if check_region:
        _check_side(mesh, points, side)
    kernel = make_kernel(k_pm)
    interactions = field_interactions(mesh, points)
    table = kernel_tables(kernel, interactions)
    ik = 1j * kernel.k

    out = np.empty((points.size, 2), dtype=complex)
    for column, e in enumerate((1.0 + 0j, 1j)):
        e_nu = np.real(np.conj(e) * mesh.nu)[None, :]
        e_tau = np.real(np.conj(e) * mesh.tau)[None, :]
        S_nu = ik * potential_operator(e_nu, table, interactions, mesh)
        S_tau = ik * potential_operator(e_tau, table, interactions, mesh)
        K_e = gradient_operator(e, table, interactions, mesh)
        K_ie = gradient_operator(1j * e, table, interactions, mesh)
        out[:, column] = 0.5 * (S_nu @ h1 + S_tau @ h2 - K_e @ h3 + K_ie @ h4)
    return out


# ---------------------------------------------------------------------------
# Boundary limits
# ---------------------------------------------------------------------------

def boundary_traces(system: DiracSystem, h: np.ndarray) -> dict:
    """
    One-sided boundary values at the mesh nodes.

    Returns:
        dict with u_plus, dnu_plus (interior field) and u_minus, dnu_minus
        (scattered exterior field), each of length N.
    """
    mesh = system.mesh
    n = mesh.n_nodes
    h_plus, h_minus = traces_from_density(h, system.params)
    plus = system.blocks_plus or ek_blocks(system.k_plus, mesh)
    minus = system.blocks_minus or ek_blocks(system.k_minus, mesh)

    interior = 0.5 * (h_plus + apply_ek(plus, h_plus))
    exterior = 0.5 * (apply_ek(minus, h_minus) - h_minus)
    return {
        "u_plus": interior[:n] / (1j * system.k_plus),
        "dnu_plus": interior[2 * n:3 * n],
        "u_minus": exterior[:n] / (1j * system.k_minus),
        "dnu_minus": exterior[2 * n:3 * n],
    }


def transmission_residual(system: DiracSystem, h: np.ndarray, direction,
                          n_samples: int = RESIDUAL_SAMPLES) -> dict:
    """
    Jump-condition residuals at boundary samples for plane-wave incidence.

    The one-sided limits come from the field evaluators, not from the
    Cauchy traces: u± and ∂_ν u± are evaluated at x ∓ jδν (j = 1..4) off
    equispaced parameter samples x and extrapolated to δ = 0.

    Returns:
        dict with "dirichlet" = max|u⁺ - u⁻ - u⁰| and
        "neumann" = max|∂_ν u⁺ - ε̂ ∂_ν(u⁻ + u⁰)| / max(1, |k₋|).
    """
    mesh = system.mesh
    t0, t1 = mesh.breakpoints[0], mesh.breakpoints[-1]
    t = np.mod(t0 + (t1 - t0) * (np.arange(n_samples) + 0.5) / n_samples, 1.0)
    x = mesh.curve.position(t)
    dx = mesh.curve.derivative(t)
    nu = -1j * dx / np.abs(dx)
    delta = LIMIT_OFFSET * float(np.min(mesh.panel_lengths))
    steps = np.arange(1, LIMIT_WEIGHTS.size + 1)
    h_plus, h_minus = traces_from_density(h, system.params)

    def limit(h_pm, k_pm, sign, side):
        points = (x[None, :] + sign * delta * steps[:, None] * nu[None, :]).ravel()
        u = eval_U(h_pm, k_pm, mesh, points, side, check_region=False)
        grad = eval_gradU(h_pm, k_pm, mesh, points, side, check_region=False)
        normal = np.tile(nu, steps.size)
        dnu = normal.real * grad[:, 0] + normal.imag * grad[:, 1]
        shape = (steps.size, n_samples)
        return LIMIT_WEIGHTS @ u.reshape(shape), LIMIT_WEIGHTS @ dnu.reshape(shape)

    u_plus, dnu_plus = limit(h_plus, system.k_plus, -1.0, "+")
    u_minus, dnu_minus = limit(h_minus, system.k_minus, 1.0, "-")

    d = unit_direction(direction)
    u0 = np.exp(1j * system.k_minus * np.real(np.conj(d) * x))
    dnu0 = 1j * system.k_minus * np.real(np.conj(d) * nu) * u0
    dirichlet = np.max(np.abs(u_plus - u_minus - u0))
    neumann = np.max(np.abs(dnu_plus - system.eps_hat * (dnu_minus + dnu0)))
    return {"dirichlet": float(dirichlet),
            "neumann": float(neumann / max(1.0, abs(system.k_minus)))}


def far_field(h_minus: np.ndarray, k_minus: complex, mesh: Mesh, angles) -> np.ndarray:
    """
    Far-field pattern u∞(x̂) of the scattered field, u⁻ ~ u∞ e^{ik|x|}/√|x|.

    Args:
        h_minus: Exterior density h⁻ = P'h.
        k_minus: Exterior wavenumber.
        mesh: Boundary mesh.
        angles: Observation angles in radians.
    """
    h1, h2, h3, _ = _split(h_minus, mesh)
    k = complex(k_minus)
    xhat = np.exp(1j * np.atleast_1d(np.asarray(angles, dtype=float)))[:, None]
    phase = np.exp(-1j * k * np.real(np.conj(xhat) * mesh.z[None, :]))
    density = (np.real(np.conj(mesh.nu)[None, :] * xhat) * h1
               + np.real(np.conj(mesh.tau)[None, :] * xhat) * h2 + h3)
    C = 0.5j * np.sqrt(2.0 / (np.pi * k)) * np.exp(-0.25j * np.pi)
    return 0.5 * C * (density * phase) @ mesh.weights
