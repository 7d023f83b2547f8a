"""
fields/oracle.py
================
Separation-of-variables solution of the transmission problem on a disk.

For a disk of radius R centred at the origin and incidence
u⁰ = exp(ik₋ d·x) = Σ iⁿ e^{-inθ_d} J_n(k₋r) e^{inθ}, each angular mode n
gives a 2x2 system for the interior coefficient a_n of J_n(k₊r) and the
scattered coefficient b_n of H_n⁽¹⁾(k₋r):

    a_n J_n(k₊R)      - b_n H_n(k₋R)          = c_n J_n(k₋R)
    a_n k₊ J_n'(k₊R)  - b_n ε̂ k₋ H_n'(k₋R)   = c_n ε̂ k₋ J_n'(k₋R)

with c_n = iⁿ e^{-inθ_d}. Used as an independent check of the boundary
integral solver.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import special

from operators.cauchy import unit_direction

logger = logging.getLogger(__name__)

MIN_ORDER = 20
MODE_RCOND = 1e-13


@dataclass
class DiskOracle:
    """
    Modal solution on a disk.

    Attributes:
        radius (float): Disk radius.
        k_minus, k_plus, eps_hat (complex): Scene parameters.
        direction (complex): Unit incidence direction.
        orders (np.ndarray): Mode numbers -n_max..n_max.
        a, b (np.ndarray): Interior and scattered coefficients per mode.
        ill_conditioned (List[int]): Modes whose 2x2 solve was near singular.
    """
    radius: float
    k_minus: complex
    k_plus: complex
    eps_hat: complex
    direction: complex
    orders: np.ndarray
    a: np.ndarray
    b: np.ndarray
    ill_conditioned: List[int] = field(default_factory=list)

    def incident_coefficients(self) -> np.ndarray:
        return (1j ** self.orders) * np.exp(-1j * self.orders * np.angle(self.direction))

    def _radial(self, points, side: str, derivative: bool = False):
        points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        r, theta = np.abs(points), np.angle(points)
        n = self.orders[None, :]
        if side == "+":
            k, coeffs, f = self.k_plus, self.a, special.jvp if derivative else special.jv
        elif side == "-":
            k, coeffs, f = self.k_minus, self.b, special.h1vp if derivative else special.hankel1
        elif side == "0":
            k, coeffs = self.k_minus, self.incident_coefficients()
            f = special.jvp if derivative else special.jv
        else:
            raise ValueError(f"side must be '+', '-' or '0', got '{side}'")
        radial = f(n, k * r[:, None])
        if derivative:
            radial = k * radial
        return radial * coeffs[None, :], np.exp(1j * n * theta[:, None]), r

    def evaluate(self, points, side: str) -> np.ndarray:
        """u⁺ (side "+"), scattered u⁻ (side "-") or incident u⁰ (side "0")."""
        radial, angular, _ = self._radial(points, side)
        return np.sum(radial * angular, axis=1)

    def radial_derivative(self, points, side: str) -> np.ndarray:
        """∂_r of the field named by side."""
        radial, angular, _ = self._radial(points, side, derivative=True)
        return np.sum(radial * angular, axis=1)

    def gradient(self, points, side: str) -> np.ndarray:
        """∇u as an (m, 2) array of (∂x u, ∂y u); points must be off the origin."""
        points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
        radial, angular, r = self._radial(points, side)
        dr = self.radial_derivative(points, side)
        dtheta = np.sum(1j * self.orders[None, :] * radial * angular, axis=1) / r
        c, s = np.real(points) / r, np.imag(points) / r
        return np.column_stack([dr * c - dtheta * s, dr * s + dtheta * c])

    def boundary_residual(self, n_samples: int = 360) -> dict:
        """Jump-condition residuals at equispaced boundary samples."""
        points = self.radius * np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
        u_plus = self.evaluate(points, "+")
        u_minus = self.evaluate(points, "-")
        u0 = self.evaluate(points, "0")
        du_plus = self.radial_derivative(points, "+")
        du_ext = self.radial_derivative(points, "-") + self.radial_derivative(points, "0")
        return {
            "dirichlet": float(np.max(np.abs(u_plus - u_minus - u0))),
            "neumann": float(np.max(np.abs(du_plus - self.eps_hat * du_ext))
                             / max(1.0, abs(self.k_minus))),
        }


def disk_oracle(radius: float, k_minus: complex, k_hat: complex, eps_hat: complex,
                direction, truncation_order: Optional[int] = None) -> DiskOracle:
    """
    Solve the modal systems of the disk transmission problem.

    Args:
        radius: Disk radius.
        k_minus: Exterior wavenumber.
        k_hat: k₊/k₋.
        eps_hat: Permittivity ratio.
        direction: Incidence angle (radians) or unit complex direction.
        truncation_order: Highest |n|; at least max(20, 2|k₋|R).

    Returns:
        DiskOracle with coefficients for every mode.

    Raises:
        ValueError: If truncation_order is below the minimum.
    """
    radius = float(radius)
    k_minus, k_hat, eps_hat = complex(k_minus), complex(k_hat), complex(eps_hat)
    k_plus = k_hat * k_minus
    d = unit_direction(direction)

    minimum = max(MIN_ORDER, int(np.ceil(2.0 * abs(k_minus) * radius)))
    n_max = minimum + 10 if truncation_order is None else int(truncation_order)
    if n_max < minimum:
        raise ValueError(f"Truncation order {n_max} is below the minimum {minimum}")

    orders = np.arange(-n_max, n_max + 1)
    c = (1j ** orders) * np.exp(-1j * orders * np.angle(d))
    xp, xm = k_plus * radius, k_minus * radius

    a = np.zeros(orders.size, dtype=complex)
    b = np.zeros(orders.size, dtype=complex)
    ill = []
    for i, n in enumerate(orders):
        H, dH = special.hankel1(n, xm), special.h1vp(n, xm)
        matrix = np.array([
            [special.jv(n, xp), -H],
            [k_plus * special.jvp(n, xp), -eps_hat * k_minus * dH],
        ])
        rhs = c[i] * np.array([special.jv(n, xm), eps_hat * k_minus * special.jvp(n, xm)])
        if not np.all(np.isfinite(matrix)):
            # overflowed Hankel factor, mode negligible at this radius
            continue
        scale = np.max(np.abs(matrix), axis=0)
        scale[scale == 0.0] = 1.0
        matrix = matrix / scale[None, :]
        rcond = 1.0 / np.linalg.cond(matrix)
        if rcond < MODE_RCOND:
            ill.append(int(n))
            logger.warning("Disk oracle mode %d is ill-conditioned (rcond %.2e)", n, rcond)
        a[i], b[i] = np.linalg.solve(matrix, rhs) / scale

    logger.debug("Disk oracle: %d modes, max |b_n| at the cut-off %.2e",
                 orders.size, max(abs(b[0]), abs(b[-1])))
    return DiskOracle(radius=radius, k_minus=k_minus, k_plus=k_plus, eps_hat=eps_hat,
                      direction=d, orders=orders, a=a, b=b, ill_conditioned=ill)
