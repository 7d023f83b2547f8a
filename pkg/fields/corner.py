"""
fields/corner.py
================
Density behaviour at a corner of a dyadically graded mesh.

Near a corner the third density component behaves like h₃(t) ∝ t^η in the
distance t to the corner. η is fitted by least squares on log|h₃| and the
unwrapped phase against log t, over the panels WINDOW counted from the
corner (the innermost panels are skipped as unresolved).
"""

import logging
from typing import List, Tuple

import numpy as np

from core.exceptions import GeometryError
from core.models import CornerFit, Mesh

logger = logging.getLogger(__name__)

WINDOW = (3, 12)
FIT_TOLERANCE = 0.05
SIDES = ("right", "left")


def _corner_panels(mesh: Mesh, side: str, window: Tuple[int, int]) -> np.ndarray:
    """Panel numbers window[0]..window[1] (1-based) from the anchor corner."""
    first, last = window
    counts = np.arange(first - 1, last)
    if side == "right":
        return counts
    if side == "left":
        return mesh.n_panels - 1 - counts
    raise ValueError(f"side must be 'right' or 'left', got '{side}'")


def _require_corner(mesh: Mesh, window: Tuple[int, int]) -> complex:
    if not mesh.curve.has_corners:
        raise GeometryError(f"Curve '{mesh.curve.name}' has no corner")
    if mesh.n_refine < window[1]:
        raise GeometryError(
            f"Corner fit over panels {window[0]}..{window[1]} needs at least {window[1]} "
            f"dyadic levels, mesh has {mesh.n_refine}")
    return complex(mesh.curve.position(np.array([mesh.curve.corners[0]]))[0])


def corner_exponent_fit(h: np.ndarray, mesh: Mesh, side: str = "right",
                        window: Tuple[int, int] = WINDOW, component: int = 3,
                        tolerance: float = FIT_TOLERANCE) -> CornerFit:
    """
    Fit h_c(t) ∝ t^η next to the anchor corner.

    Args:
        h: Density of length 4N.
        mesh: Corner-graded mesh.
        side: "right" (increasing parameter) or "left".
        window: 1-based panel range counted from the corner.
        component: 1-based density component (3 for h₃).
        tolerance: Largest accepted RMS residual of the log fit.

    Returns:
        CornerFit; accepted is False when the data are not a power law.

    Raises:
        GeometryError: If the curve is smooth or the grading is too shallow.
    """
    corner = _require_corner(mesh, window)
    values = np.asarray(h).reshape(4, mesh.n_nodes)[component - 1]
    nodes = np.concatenate([mesh.panel_nodes(p) for p in _corner_panels(mesh, side, window)])

    t = np.abs(mesh.z[nodes] - corner)
    order = np.argsort(t)
    t, v = t[order], values[nodes][order]
    if np.any(v == 0.0):
        return CornerFit(eta=complex(np.nan), residual=np.inf, side=side,
                         n_points=t.size, window=window, accepted=False)

    log_t = np.log(t)
    log_abs, phase = np.log(np.abs(v)), np.unwrap(np.angle(v))
    re_coeffs = np.polyfit(log_t, log_abs, 1)
    im_coeffs = np.polyfit(log_t, phase, 1)
    misfit = (log_abs - np.polyval(re_coeffs, log_t)) ** 2 + (phase - np.polyval(im_coeffs, log_t)) ** 2
    residual = float(np.sqrt(np.mean(misfit)))

    eta = complex(re_coeffs[0], im_coeffs[0])
    accepted = residual < tolerance
    if not accepted:
        logger.warning("Corner fit (%s) rejected: residual %.3e exceeds %.3e", side, residual, tolerance)
    else:
        logger.info("Corner fit (%s): eta = %s, residual %.2e", side, eta, residual)
    return CornerFit(eta=eta, residual=residual, side=side, n_points=int(t.size),
                     window=window, accepted=accepted)


def corner_fits(h: np.ndarray, mesh: Mesh, window: Tuple[int, int] = WINDOW) -> List[CornerFit]:
    """Fits on both sides of the anchor corner."""
    return [corner_exponent_fit(h, mesh, side=side, window=window) for side in SIDES]


def corner_profile(h: np.ndarray, mesh: Mesh) -> dict:
    """
    Density components against arclength distance to the anchor corner.

    Returns:
        dict with "side" (+1 after the corner, -1 before), "distance" and
        "h" of shape (4, N), all in node order.
    """
    if not mesh.curve.has_corners:
        raise GeometryError(f"Curve '{mesh.curve.name}' has no corner")
    s = np.cumsum(mesh.weights) - 0.5 * mesh.weights
    length = float(np.sum(mesh.weights))
    side = np.where(s <= 0.5 * length, 1, -1)
    return {"side": side, "distance": np.minimum(s, length - s),
            "h": np.asarray(h).reshape(4, mesh.n_nodes)}


def corner_continuity(h: np.ndarray, mesh: Mesh) -> dict:
    """
    Jumps of h₁ and h₂ across the anchor corner, measured between the two
    nodes closest to it, and the size of h₂ there.
    """
    if not mesh.curve.has_corners:
        raise GeometryError(f"Curve '{mesh.curve.name}' has no corner")
    parts = np.asarray(h).reshape(4, mesh.n_nodes)
    first, last = 0, mesh.n_nodes - 1
    scale = max(1.0, float(np.max(np.abs(parts[0]))))
    return {
        "h1_jump": float(abs(parts[0, first] - parts[0, last]) / scale),
        "h2_jump": float(abs(parts[1, first] - parts[1, last]) / scale),
        "h2_max_near_corner": float(max(abs(parts[1, first]), abs(parts[1, last])) / scale),
    }
