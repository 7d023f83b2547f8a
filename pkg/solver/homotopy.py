"""
solver/homotopy.py
==================
Continuation onto the negative real ε̂ axis.

For ε̂ < 0 the transmission problem is reached as a limit from above in the
complex plane. The path ε̂_j = ε̂_target + iδ₀rʲ is solved step by step,
each GMRES solve warm-started from the previous density. A probe (field
values at a few points, or the density itself) tracks the path; its
successive max-norm differences must contract for the limit to exist. The
limit is the linear Richardson extrapolation of the last two steps.
"""

import logging
from typing import Callable, Optional

import numpy as np

from core.exceptions import ConvergenceError, HomotopyError, ParameterError
from core.models import HomotopyResult
from solver.direct import solve_direct
from solver.gmres import EPS, gmres

logger = logging.getLogger(__name__)

MIN_CONTRACTION = 5.0
ROUNDOFF_FACTOR = 1e4


def _solve(matrix, rhs, solver: str, tol: float, max_iter: Optional[int], x0) -> tuple:
    if solver == "direct":
        return solve_direct(matrix, rhs), 0
    try:
        return gmres(matrix, rhs, tol=tol, max_iter=max_iter, x0=x0)
    except ConvergenceError as exc:
        logger.warning("Homotopy step: %s; continuing with the best iterate", exc)
        return exc.best, exc.iterations


def homotopy_solve(builder: Callable[[complex], tuple], eps_target: float,
                   delta0: float = 0.1, ratio: float = 0.1, steps: int = 6,
                   probe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                   solver: str = "gmres", tol: float = EPS,
                   max_iter: Optional[int] = None) -> HomotopyResult:
    """
    Solve along ε̂_target + iδ_j and extrapolate to δ = 0.

    Args:
        builder: Maps ε̂ to (matrix, rhs).
        eps_target: Real negative permittivity ratio.
        delta0: First imaginary shift.
        ratio: Geometric factor between shifts, 0 < ratio < 1.
        steps: Number of path points.
        probe: Maps a density to the tracked values (default: the density).
        solver: "gmres" (warm-started) or "direct".
        tol: GMRES relative residual threshold.
        max_iter: GMRES iteration cap per step.

    Returns:
        HomotopyResult with the extrapolated limit and the path diagnostic.

    Raises:
        ParameterError: If eps_target is not real negative or the path
                        settings are invalid.
        HomotopyError: If the probe differences grow along the path.
    """
    eps_target = complex(eps_target)
    if eps_target.imag != 0.0 or eps_target.real >= 0.0:
        raise ParameterError(f"Homotopy target ε̂ must be real negative, got {eps_target}")
    if not 0.0 < ratio < 1.0 or delta0 <= 0.0 or steps < 1:
        raise ParameterError(
            f"Invalid homotopy path: delta0={delta0}, ratio={ratio}, steps={steps}")
    if solver not in ("gmres", "direct"):
        raise ValueError(f"Unknown solver '{solver}'. Available: ['direct', 'gmres']")
    probe = probe or (lambda x: x)

    deltas, probes, differences, iterations = [], [], [], []
    x, previous = None, None
    for j in range(steps):
        delta = delta0 * ratio**j
        matrix, rhs = builder(eps_target + 1j * delta)
        if x is not None:
            previous = x
        x, its = _solve(matrix, rhs, solver, tol, max_iter, x)
        values = np.asarray(probe(x))

        deltas.append(delta)
        iterations.append(its)
        if probes:
            differences.append(float(np.max(np.abs(values - probes[-1]))))
        probes.append(values)
        logger.info("Homotopy step %d: δ = %.1e, %d iterations%s", j, delta, its,
                    f", Δ = {differences[-1]:.3e}" if differences else "")

    roundoff = ROUNDOFF_FACTOR * EPS * max(1.0, float(np.max(np.abs(probes[-1]))))
    converged = True
    for d_prev, d in zip(differences, differences[1:]):
        if d > roundoff and d_prev < MIN_CONTRACTION * d:
            converged = False
    if len(differences) >= 2 and differences[-1] > roundoff and differences[-1] >= differences[-2]:
        raise HomotopyError(
            f"Homotopy path toward ε̂ = {eps_target.real} does not converge "
            f"(last differences {differences[-2]:.3e}, {differences[-1]:.3e})",
            deltas=deltas, differences=differences, best=x,
        )

    if previous is None:
        solution, limit_probe = x, probes[-1]
    else:
        w = ratio / (1.0 - ratio)
        solution = x + w * (x - previous)
        limit_probe = probes[-1] + w * (probes[-1] - probes[-2])
    if not converged:
        logger.warning("Homotopy path contracts by less than %gx per step", MIN_CONTRACTION)

    return HomotopyResult(solution=solution, deltas=deltas, probe_values=probes,
                          differences=differences, limit_probe=limit_probe,
                          iterations=iterations, converged=converged, last_solution=x)
