"""
fields/grid.py
==============
Field evaluation on Cartesian lattices and error maps.

Lattice points are tagged interior / exterior / boundary, then evaluated
in chunks with the representation of their region. Chunks are independent
and run on a thread pool; the density and mesh are shared read-only.

Inputs:  solved density h, DiracSystem, GridSpec
Outputs: FieldGrid, error maps
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from core.models import (DiracSystem, FieldGrid, GridSpec, Mesh, REGION_BOUNDARY,
                         REGION_EXTERIOR, REGION_INTERIOR)
from fields.oracle import DiskOracle
from fields.representation import eval_gradU, eval_U, tag_points, traces_from_density

logger = logging.getLogger(__name__)

CHUNK = 2000


def grid_spec_for(mesh: Mesh, nx: int, ny: int, margin: float = 0.5,
                  gradient: bool = False) -> GridSpec:
    """GridSpec covering the curve's bounding box plus a margin."""
    z = mesh.z
    bbox = (float(z.real.min() - margin), float(z.real.max() + margin),
            float(z.imag.min() - margin), float(z.imag.max() + margin))
    return GridSpec(bbox=bbox, nx=int(nx), ny=int(ny), gradient=gradient)


def lattice(spec: GridSpec) -> tuple:
    """(x, y, points) with points row-major of shape (ny, nx)."""
    if spec.nx < 1 or spec.ny < 1:
        raise ValueError(f"Grid needs nx, ny >= 1, got {spec.nx} x {spec.ny}")
    xmin, xmax, ymin, ymax = spec.bbox
    x = np.linspace(xmin, xmax, spec.nx)
    y = np.linspace(ymin, ymax, spec.ny)
    points = x[None, :] + 1j * y[:, None]
    return x, y, points


def _evaluate_chunks(h_pm, k, mesh: Mesh, points: np.ndarray, side: str, gradient: bool,
                     workers: int) -> tuple:
    chunks = [points[i:i + CHUNK] for i in range(0, points.size, CHUNK)]

    def run(chunk):
        U = eval_U(h_pm, k, mesh, chunk, side, check_region=False)
        G = eval_gradU(h_pm, k, mesh, chunk, side, check_region=False) if gradient else None
        return U, G

    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        results = list(pool.map(run, chunks))
    U = np.concatenate([r[0] for r in results]) if results else np.zeros(0, dtype=complex)
    G = None
    if gradient:
        G = np.concatenate([r[1] for r in results]) if results else np.zeros((0, 2), dtype=complex)
    return U, G


def grid_eval(h: np.ndarray, system: DiracSystem, spec: GridSpec, workers: int = 1) -> FieldGrid:
    """
    Evaluate U± (and optionally ∇U±) on a lattice.

    Interior points get U⁺ from h⁺ with k₊, exterior points the scattered
    U⁻ from h⁻ with k₋. Points on the curve are excluded (NaN).

    Args:
        h: Solved density of the system.
        system: The Dirac system h solves.
        spec: Lattice description.
        workers: Thread-pool size for chunked evaluation.

    Returns:
        FieldGrid with region tags, collar mask and values.
    """
    mesh = system.mesh
    x, y, points = lattice(spec)
    flat = points.ravel()
    region, collar = tag_points(mesh, flat)
    h_plus, h_minus = traces_from_density(h, system.params)

    U = np.full(flat.shape, np.nan + 0j)
    gradU = np.full((flat.size, 2), np.nan + 0j) if spec.gradient else None
    for side, tag, h_pm, k in (("+", REGION_INTERIOR, h_plus, system.k_plus),
                               ("-", REGION_EXTERIOR, h_minus, system.k_minus)):
        mask = region == tag
        if not np.any(mask):
            continue
        values, grads = _evaluate_chunks(h_pm, k, mesh, flat[mask], side, spec.gradient, workers)
        U[mask] = values
        if spec.gradient:
            gradU[mask] = grads

    logger.info("Grid %d x %d: %d interior, %d exterior, %d boundary points",
                spec.nx, spec.ny, int(np.sum(region == REGION_INTERIOR)),
                int(np.sum(region == REGION_EXTERIOR)), int(np.sum(region == REGION_BOUNDARY)))
    shape = (spec.ny, spec.nx)
    return FieldGrid(
        bbox=spec.bbox, nx=spec.nx, ny=spec.ny, x=x, y=y,
        region=region.reshape(shape), collar=collar.reshape(shape),
        U=U.reshape(shape),
        gradU=None if gradU is None else gradU.reshape(shape + (2,)),
        k_minus=system.k_minus, k_plus=system.k_plus, eps_hat=system.eps_hat,
    )


# ---------------------------------------------------------------------------
# Error maps
# ---------------------------------------------------------------------------

def _summary(errors: np.ndarray, collar: np.ndarray) -> dict:
    finite = np.isfinite(errors)
    away = finite & ~collar
    near = finite & collar
    return {
        "max_error": float(np.max(errors[finite])) if np.any(finite) else 0.0,
        "max_error_away": float(np.max(errors[away])) if np.any(away) else 0.0,
        "max_error_collar": float(np.max(errors[near])) if np.any(near) else 0.0,
    }


def oracle_error(grid: FieldGrid, oracle: DiskOracle) -> tuple:
    """
    |U - oracle| on every tagged lattice point.

    Returns:
        (errors of shape (ny, nx) with NaN on the curve, summary dict)
    """
    points = grid.x[None, :] + 1j * grid.y[:, None]
    errors = np.full(points.shape, np.nan)
    for side, tag in (("+", REGION_INTERIOR), ("-", REGION_EXTERIOR)):
        mask = grid.region == tag
        if np.any(mask):
            errors[mask] = np.abs(grid.U[mask] - oracle.evaluate(points[mask], side))
    return errors, _summary(errors, grid.collar)


def overresolved_error(grid: FieldGrid, reference: FieldGrid) -> tuple:
    """
    Estimated absolute error against a field on the same lattice from a finer
    mesh. Points tagged differently by the two meshes are excluded.
    """
    if (grid.nx, grid.ny) != (reference.nx, reference.ny) or \
            not np.allclose(grid.bbox, reference.bbox):
        raise ValueError("Reference grid must share the lattice of the evaluated grid")
    same = (grid.region == reference.region) & (grid.region != REGION_BOUNDARY)
    errors = np.full(grid.U.shape, np.nan)
    errors[same] = np.abs(grid.U[same] - reference.U[same])
    return errors, _summary(errors, grid.collar)


def probe_points(mesh: Mesh, n_points: int = 10, side: str = "-",
                 distance: Optional[float] = None) -> np.ndarray:
    """
    Probe points on a circle about the curve's centroid, used to track
    homotopy paths.

    Exterior probes sit at 1.5x the largest node distance from the centroid,
    interior probes at a quarter of the smallest.
    """
    centre = complex(np.sum(mesh.weights * mesh.z) / np.sum(mesh.weights))
    angles = 2.0 * np.pi * (np.arange(n_points) + 0.5) / n_points
    if side == "-":
        radius = distance or 1.5 * float(np.max(np.abs(mesh.z - centre)))
    else:
        radius = distance or 0.25 * float(np.min(np.abs(mesh.z - centre)))
    return centre + radius * np.exp(1j * angles)
