"""
quadrature/interactions.py
==========================
Target/source pair geometry with near-zone product-integration weights.

A target is "near" a panel when its distance to the panel midpoint is less
than the panel arclength. Every near (target, panel) pair is a link. On a
link the panel is split into sub-panels (geometry/mesh.py: upsample_mesh),
and the plain Gauss weights are replaced by

    cauchy  complex weights of ∫ g(ζ)/(ζ - z) dζ
    log     real weights of    ∫ f(ζ) log|ζ - z| dσ

on the upsampled nodes. operators/layers.py evaluates the kernel splits of
specfun there and folds the result back onto the 16 panel nodes with the
interpolation matrix.

Inputs:  Mesh, optional off-curve points
Outputs: LayerInteractions
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from core.exceptions import RegionError
from core.models import LayerInteractions, Mesh
from geometry.mesh import upsample_mesh
from quadrature.gauss import FINE_ORDER, ORDER, SUBPANELS, gauss_legendre_16
from quadrature.singular import panel_weights

logger = logging.getLogger(__name__)

ON_CURVE_TOLERANCE = 1e-13


def _panel_frame(mesh: Mesh, p: int) -> tuple:
    """(node indices, midpoint, half-chord) of panel p."""
    start, end = mesh.panel_endpoints
    return mesh.panel_nodes(p), 0.5 * (start[p] + end[p]), 0.5 * (end[p] - start[p])


def near_eval_weights(mesh: Mesh, panel: int, targets, self_nodes=None) -> tuple:
    """
    Near-zone weights of one panel for a set of targets.

    Args:
        mesh: Mesh owning the panel.
        panel: Panel number.
        targets: Complex target points, shape (m,).
        self_nodes: For each target, the index (0..15) of the panel node it
                    coincides with, or -1. None means no target lies on the
                    panel.

    Returns:
        (cauchy, log) arrays of shape (m, FINE_ORDER) on the upsampled nodes:
        complex Cauchy weights in ζ and real arclength weights for log|ζ - z|.
    """
    fine = upsample_mesh(mesh)
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    m = targets.size

    # sub-panel holding each on-panel target
    owner = np.full(m, -1)
    if self_nodes is not None:
        self_nodes = np.asarray(self_nodes)
        on = self_nodes >= 0
        nodes, _ = gauss_legendre_16()
        owner[on] = np.minimum((0.5 * (nodes[self_nodes[on]] + 1.0) * SUBPANELS).astype(int),
                               SUBPANELS - 1)

    cauchy = np.empty((m, FINE_ORDER), dtype=complex)
    log = np.empty((m, FINE_ORDER))
    for b in range(SUBPANELS):
        cols = slice(b * ORDER, (b + 1) * ORDER)
        c, hc = fine.centers[panel, b], fine.half_chords[panel, b]
        s_nodes = (fine.z[panel, cols] - c) / hc
        s0 = (targets - c) / hc

        tangent = np.full(m, np.nan, dtype=complex)
        mine = owner == b
        if np.any(mine):
            tangent[mine] = mesh.dz[ORDER * panel + self_nodes[mine]] / hc

        WC, WL = panel_weights(s_nodes, s0, tangent)
        ds = fine.dz[panel, cols] / hc
        u = np.conj(ds) / np.abs(ds)
        cauchy[:, cols] = WC
        log[:, cols] = (np.abs(hc) * np.real(WL * u[None, :])
                        + np.log(np.abs(hc)) * fine.weights[panel, cols][None, :])
    return cauchy, log


def near_weights(mesh: Mesh, panel: int, target) -> tuple:
    """
    Correction row of one panel for a single off-curve target, on the
    upsampled nodes of the panel.

    Far targets get the plain fine arclength weights and a zero Cauchy row,
    so callers can use the result unconditionally.

    Raises:
        RegionError: If the target lies on the curve.
    """
    target = complex(target)
    if np.min(np.abs(mesh.z - target)) <= ON_CURVE_TOLERANCE * max(1.0, abs(target)):
        raise RegionError(f"Target {target} lies on the curve; use the boundary operators")
    _, c, _ = _panel_frame(mesh, panel)
    if abs(target - c) >= mesh.panel_lengths[panel]:
        return np.zeros(FINE_ORDER, dtype=complex), np.array(upsample_mesh(mesh).weights[panel])
    WC, WL = near_eval_weights(mesh, panel, np.array([target]))
    return WC[0], WL[0]


def _collect(mesh: Mesh, targets: np.ndarray, on_curve: bool) -> LayerInteractions:
    rho = mesh.z[None, :] - targets[:, None]
    r = np.abs(rho)
    fine = upsample_mesh(mesh)

    tree = cKDTree(np.column_stack([targets.real, targets.imag]))
    start, end = mesh.panel_endpoints
    centers = 0.5 * (start + end)
    lengths = mesh.panel_lengths

    link_targets, link_panels, cauchy, log = [], [], [], []
    for p in range(mesh.n_panels):
        near = np.array(tree.query_ball_point([centers[p].real, centers[p].imag], lengths[p]),
                        dtype=int)
        if near.size == 0:
            continue
        self_nodes = None
        if on_curve:
            self_nodes = np.where(mesh.panel_index[near] == p, near - ORDER * p, -1)
        WC, LW = near_eval_weights(mesh, p, targets[near], self_nodes)
        link_targets.append(near)
        link_panels.append(np.full(near.size, p))
        cauchy.append(WC)
        log.append(LW)

    near_targets = np.concatenate(link_targets) if link_targets else np.zeros(0, dtype=int)
    near_panels = np.concatenate(link_panels) if link_panels else np.zeros(0, dtype=int)
    fine_rho = fine.z[near_panels] - targets[near_targets][:, None]
    interactions = LayerInteractions(
        targets=targets,
        rho=rho,
        r=r,
        near_targets=near_targets,
        near_panels=near_panels,
        fine_rho=fine_rho,
        fine_r=np.abs(fine_rho),
        cauchy=np.concatenate(cauchy) if cauchy else np.zeros((0, FINE_ORDER), dtype=complex),
        log=np.concatenate(log) if log else np.zeros((0, FINE_ORDER)),
        upsampled=fine,
        symmetric=on_curve,
    )
    logger.debug("Interactions: %d targets x %d sources, %d near links",
                 len(targets), mesh.n_nodes, near_targets.size)
    return interactions


def link_values(field, interactions: LayerInteractions) -> np.ndarray:
    """
    A pair field on the upsampled nodes of every link, shape (links, F).

    field is broadcastable to (targets, sources); its values on the 16
    nodes of the linked panel are interpolated to the fine nodes.
    """
    field = np.broadcast_to(np.asarray(field), interactions.rho.shape)
    columns = ORDER * interactions.near_panels[:, None] + np.arange(ORDER)[None, :]
    coarse = field[interactions.near_targets[:, None], columns]
    return coarse @ interactions.upsampled.interpolation.T


def fold_links(matrix: np.ndarray, values: np.ndarray, interactions: LayerInteractions) -> None:
    """
    Overwrite the near entries of a (targets, sources) matrix in place with
    link values on the upsampled nodes, folded back onto the panel nodes.
    """
    if not interactions.n_links:
        return
    columns = ORDER * interactions.near_panels[:, None] + np.arange(ORDER)[None, :]
    matrix[interactions.near_targets[:, None], columns] = values @ interactions.upsampled.interpolation


@lru_cache(maxsize=8)
def boundary_interactions(mesh: Mesh) -> LayerInteractions:
    """Node-to-node interactions of a mesh (cached per mesh object)."""
    return _collect(mesh, mesh.z, on_curve=True)


def field_interactions(mesh: Mesh, points) -> LayerInteractions:
    """
    Interactions of off-curve points with the mesh nodes.

    Raises:
        RegionError: If a point coincides with a mesh node.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    scale = max(1.0, float(np.max(np.abs(mesh.z))))
    if points.size:
        tree = cKDTree(np.column_stack([mesh.z.real, mesh.z.imag]))
        distance, _ = tree.query(np.column_stack([points.real, points.imag]))
        if np.any(distance <= ON_CURVE_TOLERANCE * scale):
            bad = points[np.argmin(distance)]
            raise RegionError(f"Point {bad} lies on the curve; use the boundary operators")
    return _collect(mesh, points, on_curve=False)


def gauss_integral(mesh: Mesh, points=None) -> np.ndarray:
    """
    ∮ ⟨ν(y), y - x⟩ / |y - x|² dσ(y) with near-zone product integration.

    Equals 2π inside, 0 outside and π at smooth boundary points. Node
    targets (principal value) when points is None.
    """
    if points is None:
        interactions = boundary_interactions(mesh)
    else:
        interactions = field_interactions(mesh, points)
    with np.errstate(divide="ignore", invalid="ignore"):
        matrix = (mesh.weights * mesh.tau)[None, :] / interactions.rho
    fold_links(matrix, interactions.cauchy, interactions)
    return np.imag(matrix.sum(axis=1))
