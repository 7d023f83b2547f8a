"""
quadrature/singular.py
======================
Product-integration weights for Cauchy and logarithmic singularities on a
single 16-node panel.

A panel is mapped to local coordinates s = (ζ - c)/h_c, where c and h_c are
the midpoint and half-chord of its endpoints, so the panel runs from s = -1
to s = 1 along a (possibly curved) arc. For a target s0 the monomial moments

    p_k = ∫ s^k / (s - s0) ds,        q_k = ∫ s^k log(s - s0) ds

are computed in closed form along the arc, and weights follow from the
transposed Vandermonde system V^T W = moments on the panel nodes.

Arc versus chord: the closed form log(1 - s0) - log(-1 - s0) integrates along
the straight chord. Targets enclosed between chord and arc pick up a 2πi
residue, targets on the chord a half residue, and targets on the panel itself
get the principal value with the local tangent direction.
"""

from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.interpolate import BarycentricInterpolator

from core.models import PanelRule
from quadrature.gauss import ORDER, gauss_legendre_16

_POWERS = np.arange(ORDER)
_ENDPOINT = (1.0 - (-1.0) ** np.arange(1, ORDER + 2)) / np.arange(1, ORDER + 2)


def _arc_height(s_nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Im s of the panel arc above Re s = x, for |x| < 1."""
    xs = np.concatenate([[-1.0], s_nodes.real, [1.0]])
    ys = np.concatenate([[0.0], s_nodes.imag, [0.0]])
    if np.max(np.abs(ys)) == 0.0:
        return np.zeros_like(x)
    return BarycentricInterpolator(xs, ys)(x)


def _cauchy_moments(s_nodes: np.ndarray, s0: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    """p_0 .. p_16 along the arc, shape (m, 17)."""
    on_panel = ~np.isnan(tangent)
    p = np.empty((len(s0), ORDER + 1), dtype=complex)

    p0 = np.log(1.0 - s0) - np.log(-1.0 - s0)

    off = ~on_panel
    between = off & (np.abs(s0.real) < 1.0)
    if np.any(between):
        idx = np.flatnonzero(between)
        height = _arc_height(s_nodes, s0.real[idx])
        sign = np.sign(height)
        enclosed = (s0.imag[idx] * height > 0) & (np.abs(s0.imag[idx]) < np.abs(height))
        p0[idx[enclosed]] -= 2j * np.pi * sign[enclosed]

        on_chord = s0.imag[idx] == 0.0
        chord = idx[on_chord]
        p0[chord] = (np.log(np.abs(1.0 - s0[chord])) - np.log(np.abs(1.0 + s0[chord]))
                     - 1j * np.pi * sign[on_chord])

    if np.any(on_panel):
        s = s0[on_panel]
        T = tangent[on_panel]
        p0[on_panel] = (np.log(np.abs(1.0 - s)) - np.log(np.abs(1.0 + s))
                        + 1j * (np.angle((1.0 - s) / T) + np.angle(-T / (-1.0 - s))))

    p[:, 0] = p0
    for k in range(ORDER):
        p[:, k + 1] = s0 * p[:, k] + _ENDPOINT[k]
    return p


def panel_weights(s_nodes: np.ndarray, s0, tangent=None) -> tuple:
    """
    Cauchy and logarithmic product-integration weights on one panel.

    Args:
        s_nodes: The 16 panel nodes in local coordinates.
        s0: Target points in local coordinates, shape (m,).
        tangent: Local tangent direction at targets lying on the panel
                 (any complex multiple of ds), NaN for off-panel targets.
                 None means every target is off the panel.

    Returns:
        (WC, WL) complex arrays of shape (m, 16) with
            Σ_j WC[:, j] g(s_j) ≈ ∫ g(s)/(s - s0) ds     (p.v. on the panel)
            Σ_j WL[:, j] g(s_j) ≈ ∫ g(s) log(s - s0) ds   (continuous branch)
    """
    s_nodes = np.asarray(s_nodes, dtype=complex)
    s0 = np.atleast_1d(np.asarray(s0, dtype=complex))
    if tangent is None:
        tangent = np.full(s0.shape, np.nan, dtype=complex)
    tangent = np.atleast_1d(np.asarray(tangent, dtype=complex))
    on_panel = ~np.isnan(tangent)

    p = _cauchy_moments(s_nodes, s0, tangent)

    L1 = np.log(1.0 - s0)
    Lm1 = np.where(on_panel, np.log(-1.0 - s0 + 0j), L1 - p[:, 0])
    k1 = _POWERS + 1
    s0_pow = s0[:, None] ** k1[None, :]
    q = ((1.0 - s0_pow) * L1[:, None]
         - ((-1.0) ** k1[None, :] - s0_pow) * Lm1[:, None]
         - (p[:, 1:] - s0_pow * p[:, :1])) / k1[None, :]

    vandermonde_t = (s_nodes[:, None] ** _POWERS[None, :]).T
    lu = linalg.lu_factor(vandermonde_t)
    WC = linalg.lu_solve(lu, p[:, :ORDER].T).T
    WL = linalg.lu_solve(lu, q.T).T
    return WC, WL


# ---------------------------------------------------------------------------
# Canonical flat-panel corrections
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def panel_rule() -> PanelRule:
    """
    Gauss–Legendre rule with flat-panel self and adjacent corrections.

    Adjacent targets are the nodes of the right neighbour [1, 3].
    """
    nodes, weights = gauss_legendre_16()
    s_nodes = nodes.astype(complex)

    WC_self, WL_self = panel_weights(s_nodes, s_nodes, np.ones(ORDER, dtype=complex))
    WC_adj, WL_adj = panel_weights(s_nodes, s_nodes + 2.0)

    rule = PanelRule(
        nodes=nodes,
        weights=weights,
        log_self=WL_self.real,
        cauchy_self=WC_self.real,
        log_adjacent=WL_adj.real,
        cauchy_adjacent=WC_adj.real,
    )
    for arr in (rule.log_self, rule.cauchy_self, rule.log_adjacent, rule.cauchy_adjacent):
        arr.setflags(write=False)
    return rule


def singular_weights(kind: str, target_node: int, panel_pair: str = "self") -> np.ndarray:
    """
    One row of flat-panel product-integration weights.

    Args:
        kind: "log" for ∫ log|t - t0| p(t) dt, "cauchy" for p.v. ∫ p(t)/(t - t0) dt.
        target_node: Index 0..15 of the target node t_i.
        panel_pair: "self" (t0 = t_i), "adjacent" (t0 = t_i + 2) or any
                    other value, which returns the plain Gauss weights.

    Raises:
        ValueError: For an unknown kind or node index.
    """
    if kind not in ("log", "cauchy"):
        raise ValueError(f"Unknown singularity kind '{kind}'. Available: log, cauchy")
    if not 0 <= target_node < ORDER:
        raise ValueError(f"Target node must lie in 0..{ORDER - 1}, got {target_node}")

    rule = panel_rule()
    if panel_pair == "self":
        table = rule.log_self if kind == "log" else rule.cauchy_self
    elif panel_pair == "adjacent":
        table = rule.log_adjacent if kind == "log" else rule.cauchy_adjacent
    else:
        return np.array(rule.weights)
    return np.array(table[target_node])
