"""
solver/sweep.py
===============
Condition-number sweeps of the Dirac system over a real wavenumber range.

Each sample assembles the system at one wavenumber and records its 2-norm
condition number. Samples are independent; they run on a thread pool
(LAPACK releases the GIL) and come back in sample order. A sample is
flagged as a resonance suspect when its condition number is a local
maximum exceeding FLAG_FACTOR times the median of its ±FLAG_WINDOW
neighbourhood.

Inputs:  MaterialCase, Mesh, (kmin, kmax], sample count
Outputs: SweepResult
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from core.exceptions import ConvergenceError
from core.models import MaterialCase, Mesh, SweepRecord, SweepResult
from geometry.mesh import mesh_summary
from operators.system import assemble_dirac_system, rhs_plane_wave
from quadrature.interactions import boundary_interactions
from solver.direct import condition_estimate
from solver.gmres import gmres

logger = logging.getLogger(__name__)

FLAG_WINDOW = 10
FLAG_FACTOR = 10.0
SOUTH_WEST = np.pi / 4


def sample_grid(k_range: Tuple[float, float], n_samples: int) -> np.ndarray:
    """kmin + (kmax - kmin)·j/n for j = 1..n."""
    kmin, kmax = float(k_range[0]), float(k_range[1])
    if n_samples < 1:
        raise ValueError(f"Sample count must be at least 1, got {n_samples}")
    if not 0.0 <= kmin < kmax:
        raise ValueError(f"Sweep range must satisfy 0 <= kmin < kmax, got ({kmin}, {kmax})")
    return kmin + (kmax - kmin) * np.arange(1, n_samples + 1) / n_samples


def exterior_wavenumber(case: MaterialCase, value: float) -> complex:
    """k₋ for a value of the case's swept variable."""
    if case.sweep_variable == "k_plus":
        return complex(value) / complex(case.k_hat)
    return complex(value)


def _sample(case: MaterialCase, mesh: Mesh, value: float, seed: int,
            with_gmres: bool) -> SweepRecord:
    k_minus = exterior_wavenumber(case, value)
    system = assemble_dirac_system(k_minus, case.k_hat, case.eps_hat, mesh)
    cond, smin, _, method = condition_estimate(system, seed=seed)

    iterations = None
    if with_gmres:
        rhs = rhs_plane_wave(k_minus, SOUTH_WEST, mesh, system.params)
        try:
            _, iterations = gmres(system, rhs)
        except ConvergenceError as exc:
            iterations = exc.iterations
            logger.warning("GMRES did not converge at k- = %s", k_minus)
    return SweepRecord(k_minus=k_minus, cond_2=float(cond), sigma_min=float(smin),
                       gmres_iters=iterations, method=method)


def flag_resonances(conds: Sequence[float], window: int = FLAG_WINDOW,
                    factor: float = FLAG_FACTOR) -> List[bool]:
    """
    Flag local maxima exceeding factor x the median within ±window samples.

    Args:
        conds: Condition numbers in sample order.
        window: Half-width of the neighbourhood.
        factor: Threshold multiplier.

    Returns:
        One bool per sample.
    """
    c = np.asarray(conds, dtype=float)
    n = c.size
    flags = []
    for i in range(n):
        lo, hi = max(0, i - window), min(n, i + window + 1)
        local_max = (i == 0 or c[i] >= c[i - 1]) and (i == n - 1 or c[i] >= c[i + 1])
        flags.append(bool(n > 1 and local_max and c[i] > factor * np.median(c[lo:hi])))
    return flags


def refine_resonance(case: MaterialCase, mesh: Mesh, bracket: Tuple[float, float],
                     seed: int = 0, xatol: float = 1e-8) -> SweepRecord:
    """
    Move a flagged sample to the condition-number peak inside a bracket.

    Bounded scalar minimisation of -log cond over the swept variable.
    """
    def objective(value: float) -> float:
        system = assemble_dirac_system(exterior_wavenumber(case, value),
                                       case.k_hat, case.eps_hat, mesh)
        return -np.log(condition_estimate(system, seed=seed)[0])

    result = minimize_scalar(objective, bounds=bracket, method="bounded",
                             options={"xatol": xatol})
    record = _sample(case, mesh, float(result.x), seed, with_gmres=False)
    record.refined = True
    return record


def sweep(case: MaterialCase, mesh: Mesh, k_range: Tuple[float, float] = (0.0, 20.0),
          n_samples: int = 400, with_gmres: bool = False, workers: int = 1,
          seed: int = 0, refine_peaks: bool = False) -> SweepResult:
    """
    Condition-number sweep of the Dirac system for one material case.

    Args:
        case: Material case; sweep_variable selects k₋ or k₊ as the real
              swept quantity.
        mesh: Boundary mesh.
        k_range: (kmin, kmax] of the swept variable.
        n_samples: Number of samples.
        with_gmres: Also record GMRES iterations for a south-west plane wave.
        workers: Thread-pool size.
        seed: Seed of the condition estimator.
        refine_peaks: Refine flagged samples to the peak location.

    Returns:
        SweepResult with records in sample order.
    """
    values = sample_grid(k_range, n_samples)
    logger.info("Sweep '%s': %d samples over (%g, %g], %d nodes, %d workers",
                case.name, n_samples, float(k_range[0]), values[-1], mesh.n_nodes, workers)

    # Shared pair geometry; built once before the pool starts.
    boundary_interactions(mesh)

    def run(value: float) -> SweepRecord:
        return _sample(case, mesh, value, seed, with_gmres)

    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        records = list(pool.map(run, values))

    for record, flag in zip(records, flag_resonances([r.cond_2 for r in records])):
        record.flag = flag

    if refine_peaks:
        step = values[1] - values[0] if values.size > 1 else 0.0
        for i, record in enumerate(records):
            if not record.flag or step == 0.0:
                continue
            bracket = (max(values[i] - step, 1e-12), values[i] + step)
            try:
                refined = refine_resonance(case, mesh, bracket, seed=seed)
            except (ValueError, RuntimeError) as exc:
                logger.warning("Peak refinement near %g failed: %s", values[i], exc)
                continue
            refined.flag = True
            records[i] = refined

    result = SweepResult(case=case.name, k_hat=complex(case.k_hat), eps_hat=complex(case.eps_hat),
                         records=records, mesh_summary=mesh_summary(mesh))
    logger.info("Sweep '%s' finished: %d resonance flags", case.name, result.n_flags)
    return result


def sweep_values(result: SweepResult, case: Optional[MaterialCase] = None) -> np.ndarray:
    """Swept real variable of each record (k₊ for k_plus cases)."""
    k = np.array([r.k_minus for r in result.records], dtype=complex)
    if case is not None and case.sweep_variable == "k_plus":
        return np.real(k * complex(case.k_hat))
    return np.real(k)
