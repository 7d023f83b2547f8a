"""
geometry/mesh.py
================
Composite 16-point Gauss–Legendre panel meshes on closed curves.

Panels are uniform in the curve parameter, anchored so that every corner is
a panel endpoint. Dyadic grading splits the two panels touching a corner
n_refine times toward it, so the smallest panel next to the corner has
parameter length base / 2^n_refine.

Inputs:  Curve (from geometry/curves.py)
Outputs: Mesh (consumed by quadrature/, operators/, fields/)
"""

import logging
import re
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from core.exceptions import GeometryError
from core.models import Curve, Mesh, UpsampledPanels
from quadrature.gauss import SUBPANELS, gauss_legendre_16, subpanel_nodes, upsampling_matrix

logger = logging.getLogger(__name__)

MIN_PANELS = 4
_DYADIC = re.compile(r"^dyadic\((\d+)\)$")


def make_mesh(curve: Curve, n_panels: int, grading="none") -> Mesh:
    """
    Discretise a curve with n_panels base panels of 16 nodes each.

    Args:
        curve: Closed counter-clockwise curve.
        n_panels: Number of base panels (≥ 4).
        grading: "none", "dyadic(n)" or an integer n of refinement levels.

    Returns:
        Mesh with nodes, frame vectors and arclength weights.

    Raises:
        GeometryError: If n_panels < 4, the grading descriptor is malformed,
                       or the curve is clockwise.
    """
    if int(n_panels) != n_panels or n_panels < MIN_PANELS:
        raise GeometryError(f"A mesh needs at least {MIN_PANELS} panels, got {n_panels}")
    n_refine = _parse_grading(grading)

    if n_refine and not curve.has_corners:
        logger.warning("Dyadic refinement requested on smooth curve '%s'; ignoring", curve.name)
        n_refine = 0

    breakpoints = _breakpoints(curve, int(n_panels), n_refine)
    nodes, gl_weights = gauss_legendre_16()

    left, right = breakpoints[:-1], breakpoints[1:]
    half = 0.5 * (right - left)
    t_unwrapped = (0.5 * (left + right))[:, None] + half[:, None] * nodes[None, :]
    t = np.mod(t_unwrapped.ravel(), 1.0)

    z = curve.position(t)
    dz = curve.derivative(t)
    speed = np.abs(dz)
    if np.any(speed == 0.0):
        raise GeometryError(f"Curve '{curve.name}' has a stationary point at a mesh node")
    tau = dz / speed
    nu = -1j * tau
    weights = (half[:, None] * gl_weights[None, :]).ravel() * speed

    mesh = Mesh(
        curve=curve,
        breakpoints=breakpoints,
        t=t,
        z=z,
        dz=dz,
        speed=speed,
        nu=nu,
        tau=tau,
        weights=weights,
        panel_index=np.repeat(np.arange(len(left)), 16),
        grading=f"dyadic({n_refine})" if n_refine else "none",
        n_refine=n_refine,
    )

    area = signed_area(mesh)
    if area <= 0:
        raise GeometryError(f"Curve '{curve.name}' is clockwise (signed area {area:.3e})")
    logger.debug("Meshed %s: %d panels, %d nodes, %s",
                 curve.name, mesh.n_panels, mesh.n_nodes, mesh.grading)
    return mesh


@lru_cache(maxsize=8)
def upsample_mesh(mesh: Mesh) -> UpsampledPanels:
    """
    Split every panel into SUBPANELS equal parameter pieces with 16 nodes
    each (cached per mesh object).

    Positions and frame vectors come from the curve itself, not from
    interpolation.
    """
    _, gl_weights = gauss_legendre_16()
    left, right = mesh.breakpoints[:-1], mesh.breakpoints[1:]
    half = 0.5 * (right - left)

    t = np.mod((0.5 * (left + right))[:, None] + half[:, None] * subpanel_nodes()[None, :], 1.0)
    z = mesh.curve.position(t)
    dz = mesh.curve.derivative(t)
    speed = np.abs(dz)
    weights = (half / SUBPANELS)[:, None] * np.tile(gl_weights, SUBPANELS)[None, :] * speed

    edges = left[:, None] + (right - left)[:, None] * np.linspace(0.0, 1.0, SUBPANELS + 1)[None, :]
    ends = mesh.curve.position(np.mod(edges, 1.0))
    return UpsampledPanels(
        t=t,
        z=z,
        dz=dz,
        tau=dz / speed,
        weights=weights,
        centers=0.5 * (ends[:, :-1] + ends[:, 1:]),
        half_chords=0.5 * (ends[:, 1:] - ends[:, :-1]),
        interpolation=upsampling_matrix(),
    )


def _parse_grading(grading) -> int:
    if grading is None or grading == "none":
        return 0
    if isinstance(grading, (int, np.integer)):
        if grading < 0:
            raise GeometryError(f"Refinement levels must be ≥ 0, got {grading}")
        return int(grading)
    match = _DYADIC.match(str(grading).strip())
    if not match:
        raise GeometryError(f"Grading must be 'none' or 'dyadic(n)', got '{grading}'")
    return int(match.group(1))


def _breakpoints(curve: Curve, n_panels: int, n_refine: int) -> np.ndarray:
    """Panel endpoints in unwrapped parameter [anchor, anchor + 1]."""
    anchor = curve.corners[0] if curve.has_corners else 0.0
    points = set((anchor + np.arange(n_panels + 1) / n_panels).tolist())

    # every corner becomes an endpoint; the anchor corner appears at both ends
    corners = [anchor, anchor + 1.0]
    corners += [anchor + np.mod(c - anchor, 1.0) for c in curve.corners[1:]]
    points.update(corners[2:])

    ordered = np.array(sorted(points))
    for c in corners:
        i = int(np.argmin(np.abs(ordered - c)))
        if i + 1 < len(ordered):
            h = ordered[i + 1] - c
            points.update((c + h / 2.0 ** np.arange(1, n_refine + 1)).tolist())
        if i > 0:
            h = c - ordered[i - 1]
            points.update((c - h / 2.0 ** np.arange(1, n_refine + 1)).tolist())
    return np.array(sorted(points))


# ---------------------------------------------------------------------------
# Mesh diagnostics
# ---------------------------------------------------------------------------

def curve_length(mesh: Mesh) -> float:
    """Total arclength."""
    return float(np.sum(mesh.weights))


def signed_area(mesh: Mesh) -> float:
    """Enclosed area from ½∮ x·ν dσ (positive for counter-clockwise)."""
    return 0.5 * float(np.sum(mesh.weights * np.real(np.conj(mesh.z) * mesh.nu)))


def mesh_summary(mesh: Mesh) -> dict:
    """Plain description of a mesh for provenance headers."""
    lengths = mesh.panel_lengths
    return {
        "shape": mesh.curve.name,
        "shape_parameters": dict(mesh.curve.parameters),
        "panels": mesh.n_panels,
        "nodes": mesh.n_nodes,
        "grading": mesh.grading,
        "corners": list(mesh.curve.corners),
        "length": curve_length(mesh),
        "min_panel_length": float(lengths.min()),
        "max_panel_length": float(lengths.max()),
    }


def _polyline(mesh: Mesh) -> np.ndarray:
    """Closed polyline through panel start points and nodes, in order."""
    start, _ = mesh.panel_endpoints
    verts = np.empty((mesh.n_panels, 17), dtype=complex)
    verts[:, 0] = start
    verts[:, 1:] = mesh.z.reshape(mesh.n_panels, 16)
    verts = verts.ravel()
    return np.append(verts, verts[0])


def winding_number(mesh: Mesh, points, chunk: int = 512) -> np.ndarray:
    """
    Winding number of the mesh polyline around each point.

    Returns a real array; values are ≈ 1 inside, ≈ 0 outside, and fractional
    for points on the polyline itself.
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    verts = _polyline(mesh)
    out = np.empty(points.shape)
    for start in range(0, len(points), chunk):
        p = points[start:start + chunk, None]
        d = verts[None, :] - p
        with np.errstate(invalid="ignore", divide="ignore"):
            turn = np.angle(d[:, 1:] / d[:, :-1])
        out[start:start + chunk] = np.nansum(turn, axis=1) / (2.0 * np.pi)
    return out


def boundary_distance(mesh: Mesh, points) -> tuple:
    """
    Distance from each point to the nearest mesh node.

    Returns:
        (distance, nearest node index, arclength of that node's panel)
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex)).ravel()
    tree = cKDTree(np.column_stack([mesh.z.real, mesh.z.imag]))
    distance, index = tree.query(np.column_stack([points.real, points.imag]))
    return distance, index, mesh.panel_lengths[mesh.panel_index[index]]
