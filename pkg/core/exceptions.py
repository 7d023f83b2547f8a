"""
core/exceptions.py
==================
Exception types shared across the solver.

Argument problems subclass ValueError; numerical failures subclass
RuntimeError and carry the data a caller needs to report or recover
(best iterate, smallest singular value, homotopy path).
"""

from typing import List, Optional

import numpy as np


class GeometryError(ValueError):
    """Invalid curve or mesh request."""


class ParameterError(ValueError):
    """Wavenumber or material parameter outside the admissible set."""


class RegionError(ValueError):
    """Field point outside the requested region, or on the boundary."""


class ConfigError(ValueError):
    """
    Experiment configuration could not be parsed or validated.

    Attributes:
        line (int | None): 1-based line number in the config file.
        field (str | None): Offending key.
    """

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class SpecialFunctionError(RuntimeError):
    """Hankel evaluation outside its domain or accuracy regime."""


class SolverError(RuntimeError):
    """Base class for linear-solver failures."""


class SingularMatrixError(SolverError):
    """
    Matrix is numerically singular.

    Attributes:
        sigma_min (float): Estimate of the smallest singular value.
    """

    def __init__(self, message: str, sigma_min: float):
        super().__init__(f"{message} (sigma_min ≈ {sigma_min:.3e})")
        self.sigma_min = sigma_min


class ConvergenceError(SolverError):
    """
    Iteration stopped before reaching its tolerance.

    Attributes:
        best (np.ndarray | None): Best iterate found.
        iterations (int): Iterations performed.
        residuals (List[float]): Relative residual history.
    """

    def __init__(self, message: str, best: Optional[np.ndarray] = None,
                 iterations: int = 0, residuals: Optional[List[float]] = None):
        super().__init__(message)
        self.best = best
        self.iterations = iterations
        self.residuals = residuals or []


class HomotopyError(ConvergenceError):
    """
    Homotopy path has no limit.

    Attributes:
        deltas (List[float]): δ values reached.
        differences (List[float]): Successive probe differences.
    """

    def __init__(self, message: str, deltas: List[float], differences: List[float],
                 best: Optional[np.ndarray] = None):
        super().__init__(message, best=best, iterations=len(deltas), residuals=differences)
        self.deltas = deltas
        self.differences = differences
