"""
simulation/export.py
====================
Output files, each carrying a JSON provenance record.

    CSV     first line "# {provenance json}", then a header row
    JSON    top-level "provenance" key
    grid    <stem>.json metadata + <stem>.bin row-major complex128 U
            (+ <stem>.grad.bin for ∇U, <stem>.region.bin int8 tags)
    matrix  MAGIC | rows, cols (uint64) | dtype tag (8 bytes) |
            provenance length (uint64) | provenance json | complex128 payload

All binary data are little-endian.
"""

import json
import logging
import os
from typing import Optional

import numpy as np

from core import __version__
from core.config import config_dict, config_hash
from core.models import ExperimentConfig, FieldGrid, Mesh, SweepResult
from geometry.mesh import mesh_summary

logger = logging.getLogger(__name__)

MATRIX_MAGIC = b"DIRACBIE"
MATRIX_DTYPE = b"c16\x00\x00\x00\x00\x00"
SWEEP_HEADER = "k_minus_re,k_minus_im,cond2,sigma_min,gmres_iters,flag"
GRID_CSV_LIMIT = 10_000


def to_jsonable(value):
    """Recursively convert complex and numpy values for json.dumps."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def provenance(config: ExperimentConfig, mesh: Optional[Mesh] = None, **extra) -> dict:
    """Config hash, parameter triple, mesh summary and code version."""
    record = {
        "version": __version__,
        "config_hash": config_hash(config),
        "parameters": {"k_minus": config.k_minus, "k_hat": config.k_hat,
                       "eps_hat": config.eps_hat, "case": config.case},
        "config": config_dict(config),
    }
    if mesh is not None:
        record["mesh"] = mesh_summary(mesh)
    record.update(extra)
    return to_jsonable(record)


def _ensure_dir(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def _write_csv(path: str, header: str, rows, record: dict) -> str:
    _ensure_dir(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# " + json.dumps(to_jsonable(record), sort_keys=True) + "\n")
        handle.write(header + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")
    logger.debug("Wrote %s", path)
    return path


def read_csv(path: str) -> tuple:
    """(provenance, header fields, rows of strings) of a file written here."""
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path} has no provenance line")
        header = handle.readline().strip().split(",")
        rows = [line.strip().split(",") for line in handle if line.strip()]
    return json.loads(first[2:]), header, rows


# ---------------------------------------------------------------------------
# CSV outputs
# ---------------------------------------------------------------------------

def write_sweep_csv(path: str, result: SweepResult, record: dict) -> str:
    """One row per SweepRecord."""
    rows = (
        (f"{r.k_minus.real:.16e}", f"{r.k_minus.imag:.16e}", f"{r.cond_2:.16e}",
         f"{r.sigma_min:.16e}", "" if r.gmres_iters is None else str(r.gmres_iters),
         "1" if r.flag else "0")
        for r in result.records
    )
    return _write_csv(path, SWEEP_HEADER, rows, record)


def write_density_csv(path: str, mesh: Mesh, h: np.ndarray, record: dict) -> str:
    """Nodes with the four density components."""
    parts = np.asarray(h).reshape(4, mesh.n_nodes)
    header = "t,x,y,weight," + ",".join(f"h{c}_re,h{c}_im" for c in range(1, 5))
    rows = (
        [f"{mesh.t[i]:.16e}", f"{mesh.z[i].real:.16e}", f"{mesh.z[i].imag:.16e}",
         f"{mesh.weights[i]:.16e}"]
        + [f"{v:.16e}" for c in range(4) for v in (parts[c, i].real, parts[c, i].imag)]
        for i in range(mesh.n_nodes)
    )
    return _write_csv(path, header, rows, record)


def write_traces_csv(path: str, mesh: Mesh, traces: dict, record: dict) -> str:
    """One-sided boundary values at the nodes."""
    keys = ("u_plus", "dnu_plus", "u_minus", "dnu_minus")
    header = "x,y," + ",".join(f"{k}_re,{k}_im" for k in keys)
    rows = (
        [f"{mesh.z[i].real:.16e}", f"{mesh.z[i].imag:.16e}"]
        + [f"{v:.16e}" for k in keys for v in (traces[k][i].real, traces[k][i].imag)]
        for i in range(mesh.n_nodes)
    )
    return _write_csv(path, header, rows, record)


def write_profile_csv(path: str, profile: dict, record: dict) -> str:
    """Density against distance to a corner."""
    h = profile["h"]
    header = "side,distance," + ",".join(f"h{c}_re,h{c}_im" for c in range(1, 5))
    rows = (
        [str(int(profile["side"][i])), f"{profile['distance'][i]:.16e}"]
        + [f"{v:.16e}" for c in range(4) for v in (h[c, i].real, h[c, i].imag)]
        for i in range(h.shape[1])
    )
    return _write_csv(path, header, rows, record)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def write_grid(stem: str, grid: FieldGrid, record: dict, errors: Optional[np.ndarray] = None) -> list:
    """
    JSON metadata plus binary payloads; a CSV too for small grids.

    Returns:
        Paths written.
    """
    _ensure_dir(stem)
    paths = []
    meta = {
        "provenance": record,
        "bbox": list(grid.bbox),
        "nx": grid.nx,
        "ny": grid.ny,
        "k_minus": grid.k_minus,
        "k_plus": grid.k_plus,
        "eps_hat": grid.eps_hat,
        "dtype": "complex128",
        "byteorder": "little",
        "order": "row-major (ny, nx)",
        "payload": os.path.basename(stem) + ".bin",
        "region_payload": os.path.basename(stem) + ".region.bin",
        "gradient_payload": os.path.basename(stem) + ".grad.bin" if grid.gradU is not None else None,
        "error_payload": os.path.basename(stem) + ".error.bin" if errors is not None else None,
    }
    with open(stem + ".json", "w", encoding="utf-8") as handle:
        json.dump(to_jsonable(meta), handle, indent=2, sort_keys=True)
    paths.append(stem + ".json")

    payloads = [(".bin", grid.U.astype("<c16")), (".region.bin", grid.region.astype("<i1"))]
    if grid.gradU is not None:
        payloads.append((".grad.bin", grid.gradU.astype("<c16")))
    if errors is not None:
        payloads.append((".error.bin", np.asarray(errors, dtype="<f8")))
    for suffix, array in payloads:
        with open(stem + suffix, "wb") as handle:
            handle.write(np.ascontiguousarray(array).tobytes())
        paths.append(stem + suffix)

    if grid.nx * grid.ny <= GRID_CSV_LIMIT:
        X, Y = np.meshgrid(grid.x, grid.y)
        rows = (
            (f"{x:.16e}", f"{y:.16e}", str(int(tag)), f"{u.real:.16e}", f"{u.imag:.16e}")
            for x, y, tag, u in zip(X.ravel(), Y.ravel(), grid.region.ravel(), grid.U.ravel())
        )
        paths.append(_write_csv(stem + ".csv", "x,y,region,U_re,U_im", rows, record))
    return paths


def read_grid(stem: str) -> tuple:
    """(metadata, U, region) of a grid written by write_grid."""
    with open(stem + ".json", encoding="utf-8") as handle:
        meta = json.load(handle)
    shape = (meta["ny"], meta["nx"])
    directory = os.path.dirname(stem)
    U = np.fromfile(os.path.join(directory, meta["payload"]), dtype="<c16").reshape(shape)
    region = np.fromfile(os.path.join(directory, meta["region_payload"]), dtype="<i1").reshape(shape)
    return meta, U, region


# ---------------------------------------------------------------------------
# Matrices and reports
# ---------------------------------------------------------------------------

def write_matrix(path: str, matrix: np.ndarray, record: dict) -> str:
    """Dense complex matrix in the binary layout of the module docstring."""
    _ensure_dir(path)
    matrix = np.asarray(matrix, dtype="<c16")
    blob = json.dumps(to_jsonable(record), sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MATRIX_MAGIC)
        handle.write(np.array(matrix.shape, dtype="<u8").tobytes())
        handle.write(MATRIX_DTYPE)
        handle.write(np.array([len(blob)], dtype="<u8").tobytes())
        handle.write(blob)
        handle.write(np.ascontiguousarray(matrix).tobytes())
    return path


def read_matrix(path: str) -> tuple:
    """
    (matrix, provenance) from a file written by write_matrix.

    Raises:
        ValueError: On a wrong magic number or dtype tag.
    """
    with open(path, "rb") as handle:
        if handle.read(len(MATRIX_MAGIC)) != MATRIX_MAGIC:
            raise ValueError(f"{path} is not a matrix file")
        rows, cols = np.frombuffer(handle.read(16), dtype="<u8")
        if handle.read(8) != MATRIX_DTYPE:
            raise ValueError(f"{path} has an unsupported dtype tag")
        length = int(np.frombuffer(handle.read(8), dtype="<u8")[0])
        record = json.loads(handle.read(length).decode("utf-8"))
        data = np.frombuffer(handle.read(), dtype="<c16")
    return data.reshape(int(rows), int(cols)), record


def write_json(path: str, report: dict, record: Optional[dict] = None) -> str:
    """JSON report with an optional provenance key."""
    _ensure_dir(path)
    payload = dict(report)
    if record is not None:
        payload["provenance"] = record
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True)
    return path


def write_probe_csv(path: str, points: np.ndarray, sides, columns: dict, record: dict) -> str:
    """Values at probe points; columns maps a name to one complex value per point."""
    header = "x,y,side," + ",".join(f"{name}_re,{name}_im" for name in columns)
    rows = (
        [f"{p.real:.16e}", f"{p.imag:.16e}", side]
        + [f"{v:.16e}" for values in columns.values() for v in (values[i].real, values[i].imag)]
        for i, (p, side) in enumerate(zip(points, sides))
    )
    return _write_csv(path, header, rows, record)
