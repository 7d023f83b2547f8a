"""
solver/direct.py
================
Dense LU solves and 2-norm condition numbers.

Small systems get an exact SVD. Above SVD_LIMIT unknowns the extreme
singular values are estimated from one LU factorisation: power iteration on
AᴴA for σ_max and inverse iteration through the LU factors for σ_min, both
started from a seeded random vector.
"""

import logging

import numpy as np
from scipy import linalg

from core.exceptions import SingularMatrixError

logger = logging.getLogger(__name__)

SVD_LIMIT = 2000
ESTIMATE_ITERATIONS = 60
ESTIMATE_RTOL = 1e-6


def _as_matrix(system) -> np.ndarray:
    """Accept a bare matrix or anything carrying one in .matrix."""
    return np.asarray(getattr(system, "matrix", system))


def solve_direct(system, rhs: np.ndarray) -> np.ndarray:
    """
    Solve Ax = b by LU with partial pivoting.

    Args:
        system: Square matrix, or DiracSystem / MullerSystem.
        rhs: Right-hand side of matching length.

    Returns:
        Solution vector.

    Raises:
        ValueError: If shapes do not match.
        SingularMatrixError: If the reciprocal condition estimate falls below
                             n·eps; carries an estimate of σ_min.
    """
    A = _as_matrix(system)
    b = np.asarray(rhs)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"solve_direct needs a square matrix, got shape {A.shape}")
    if b.shape[0] != n:
        raise ValueError(f"Right-hand side length {b.shape[0]} does not match matrix size {n}")

    anorm = float(np.max(np.sum(np.abs(A), axis=0)))
    lu, piv = linalg.lu_factor(A, check_finite=False)
    gecon, = linalg.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        raise RuntimeError(f"LAPACK gecon failed with info = {info}")

    eps = np.finfo(float).eps
    if not rcond >= n * eps:
        raise SingularMatrixError(
            f"Matrix of size {n} is numerically singular (rcond = {rcond:.3e})",
            sigma_min=float(rcond * anorm / np.sqrt(n)),
        )
    return linalg.lu_solve((lu, piv), b, check_finite=False)


def condition_estimate(system, seed: int = 0, svd_limit: int = SVD_LIMIT) -> tuple:
    """
    2-norm condition number with the extreme singular values.

    Returns:
        (cond, sigma_min, sigma_max, method) with method "svd" or "estimate".
    """
    A = _as_matrix(system)
    n = A.shape[0]
    if n <= svd_limit:
        s = linalg.svdvals(A, check_finite=False)
        smax, smin = float(s[0]), float(s[-1])
        cond = np.inf if smin == 0.0 else smax / smin
        return cond, smin, smax, "svd"

    logger.debug("Estimating condition number of a %d x %d matrix (seed %d)", n, n, seed)
    rng = np.random.default_rng(seed)
    start = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    smax = _power_iteration(lambda x: A.conj().T @ (A @ x), start)
    lu = linalg.lu_factor(A, check_finite=False)

    def inverse_normal(x):
        y = linalg.lu_solve(lu, x, trans=2, check_finite=False)
        return linalg.lu_solve(lu, y, check_finite=False)

    inv_smin = _power_iteration(lambda x: inverse_normal(x), start)
    smax, smin = np.sqrt(smax), 1.0 / np.sqrt(inv_smin)
    return smax / smin, float(smin), float(smax), "estimate"


def _power_iteration(apply, start: np.ndarray) -> float:
    """Dominant eigenvalue of a Hermitian positive operator."""
    x = start / np.linalg.norm(start)
    value = 0.0
    for _ in range(ESTIMATE_ITERATIONS):
        y = apply(x)
        new_value = float(np.real(np.vdot(x, y)))
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if value and abs(new_value - value) <= ESTIMATE_RTOL * abs(new_value):
            return new_value
        value = new_value
    return value


def condition_number(system, seed: int = 0) -> float:
    """2-norm condition number (exact SVD or seeded estimate)."""
    return condition_estimate(system, seed=seed)[0]
