"""
quadrature/gauss.py
===================
Canonical 16-point Gauss–Legendre rule on [-1, 1], and the sub-panel rule
that near-zone product integration runs on.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre
from scipy.interpolate import BarycentricInterpolator

ORDER = 16


@lru_cache(maxsize=1)
def _rule() -> tuple:
    nodes, weights = legendre.leggauss(ORDER)
    # exact antisymmetry of the nodes, symmetric weights
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_16() -> tuple:
    """
    Nodes (ascending) and weights of the 16-point rule on [-1, 1].

    Exact for polynomials of degree ≤ 31.
    """
    return _rule()


# ---------------------------------------------------------------------------
# Sub-panel upsampling
# ---------------------------------------------------------------------------

SUBPANELS = 2
FINE_ORDER = SUBPANELS * ORDER


@lru_cache(maxsize=1)
def subpanel_nodes() -> np.ndarray:
    """
    Nodes of SUBPANELS equal 16-point sub-rules in the coordinate of the
    parent panel, [-1, 1], sub-panel by sub-panel.
    """
    nodes, _ = _rule()
    edges = np.linspace(-1.0, 1.0, SUBPANELS + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    fine = (centers[:, None] + (1.0 / SUBPANELS) * nodes[None, :]).ravel()
    fine.setflags(write=False)
    return fine


@lru_cache(maxsize=1)
def upsampling_matrix() -> np.ndarray:
    """
    Lagrange interpolation from the 16 panel nodes to subpanel_nodes(),
    shape (FINE_ORDER, 16).
    """
    nodes, _ = _rule()
    matrix = BarycentricInterpolator(nodes, np.eye(ORDER))(subpanel_nodes())
    matrix.setflags(write=False)
    return matrix
