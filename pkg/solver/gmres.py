"""
solver/gmres.py
===============
Unrestarted GMRES for dense complex systems.

Arnoldi with modified Gram–Schmidt, the least-squares problem kept upper
triangular by Givens rotations (BLAS zrotg), so the residual norm is
available at every step without forming the iterate. The default stopping
threshold is machine epsilon on the relative residual. In floating point
the residual levels off at about that size, so a run also stops once it
is within STALL_LEVEL and has gained less than a factor STALL_GAIN over
the last STALL_WINDOW iterations.
"""

import logging
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.linalg import blas

from core.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
STALL_LEVEL = 16.0 * EPS
STALL_WINDOW = 3
STALL_GAIN = 2.0


def _operator(system) -> Callable[[np.ndarray], np.ndarray]:
    if callable(system) and not isinstance(system, np.ndarray):
        return system
    A = np.asarray(getattr(system, "matrix", system))
    return lambda v: A @ v


def _stalled(residuals: list) -> bool:
    """Residual at machine precision and no longer decreasing."""
    if len(residuals) <= STALL_WINDOW or residuals[-1] > STALL_LEVEL:
        return False
    return residuals[-1] * STALL_GAIN > residuals[-1 - STALL_WINDOW]


def gmres(system, rhs: np.ndarray, tol: float = EPS, max_iter: Optional[int] = None,
          x0: Optional[np.ndarray] = None,
          callback: Optional[Callable[[int, float], None]] = None) -> tuple:
    """
    Solve Ax = b to relative residual ‖b - Ax‖/‖b‖ ≤ tol.

    Args:
        system: Matrix, object with .matrix, or a callable v -> Av.
        rhs: Right-hand side b.
        tol: Relative residual threshold, ≥ machine epsilon.
        max_iter: Iteration cap (default: len(b)).
        x0: Initial guess (warm start).
        callback: Called as callback(iteration, relative_residual).

    Returns:
        (x, iterations)

    Raises:
        ValueError: If tol < machine epsilon.
        ConvergenceError: If max_iter is reached first; carries the best iterate.
    """
    if tol < EPS:
        raise ValueError(f"GMRES tolerance {tol:.3e} is below machine epsilon")
    apply = _operator(system)
    b = np.asarray(rhs, dtype=complex)
    n = b.shape[0]
    max_iter = n if max_iter is None else int(max_iter)

    b_norm = np.linalg.norm(b)
    x0 = np.zeros(n, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
    if b_norm == 0.0:
        return np.zeros(n, dtype=complex), 0

    r = b - apply(x0)
    beta = np.linalg.norm(r)
    if beta / b_norm <= tol:
        return x0.copy(), 0

    Q = np.empty((n, max_iter + 1), dtype=complex)
    H = np.zeros((max_iter + 1, max_iter), dtype=complex)
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter, dtype=complex)
    g = np.zeros(max_iter + 1, dtype=complex)
    g[0] = beta
    Q[:, 0] = r / beta

    residuals = []
    k = 0
    for k in range(max_iter):
        w = apply(Q[:, k])
        for i in range(k + 1):
            H[i, k] = np.vdot(Q[:, i], w)
            w = w - H[i, k] * Q[:, i]
        h_next = np.linalg.norm(w)
        H[k + 1, k] = h_next

        for i in range(k):
            temp = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -np.conj(sn[i]) * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = temp
        c, s = blas.zrotg(H[k, k], H[k + 1, k])
        cs[k], sn[k] = np.real(c), s
        H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -np.conj(sn[k]) * g[k]
        g[k] = cs[k] * g[k]

        residual = abs(g[k + 1]) / b_norm
        residuals.append(residual)
        if callback is not None:
            callback(k + 1, residual)

        if residual <= tol or h_next <= EPS * beta or _stalled(residuals):
            y = linalg.solve_triangular(H[:k + 1, :k + 1], g[:k + 1])
            logger.debug("GMRES stopped after %d iterations (residual %.3e)", k + 1, residual)
            return x0 + Q[:, :k + 1] @ y, k + 1
        Q[:, k + 1] = w / h_next

    y = linalg.solve_triangular(H[:k + 1, :k + 1], g[:k + 1])
    best = x0 + Q[:, :k + 1] @ y
    raise ConvergenceError(
        f"GMRES did not reach {tol:.1e} in {max_iter} iterations "
        f"(relative residual {residuals[-1]:.3e})",
        best=best, iterations=max_iter, residuals=residuals,
    )
