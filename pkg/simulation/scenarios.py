"""
simulation/scenarios.py
=======================
Material cases and field scenes.

The three canonical cases are hard-bound to their parameter triples:

    positive            k̂ = 1.5          ε̂ = 2.25       sweep k₋
    plasmonic           k̂ = i√1.1838     ε̂ = -1.1838    sweep k₋
    reverse-plasmonic   k̂ = 1/(i√1.1838)  ε̂ = -1/1.1838  sweep k₊ (real)

Field scenes bind a case to a shape, mesh, wavenumber and incidence.

To add a new case:
  1. Define a MaterialCase below
  2. Register it in CASES
"""

import dataclasses
import logging

import numpy as np

from core.exceptions import ConfigError
from core.models import Curve, ExperimentConfig, MaterialCase, Mesh
from geometry.curves import CURVES, build_curve
from geometry.mesh import make_mesh

logger = logging.getLogger(__name__)

PLASMA = 1.1838


# ---------------------------------------------------------------------------
# Case registry
# ---------------------------------------------------------------------------

POSITIVE = MaterialCase(
    name="positive",
    k_hat=1.5 + 0j,
    eps_hat=2.25 + 0j,
    description="positive dielectric, k̂ = 1.5, ε̂ = k̂²",
)

PLASMONIC = MaterialCase(
    name="plasmonic",
    k_hat=1j * np.sqrt(PLASMA),
    eps_hat=-PLASMA + 0j,
    description="negative permittivity, ε̂ = -1.1838 below the critical interval",
)

REVERSE_PLASMONIC = MaterialCase(
    name="reverse-plasmonic",
    k_hat=1.0 / (1j * np.sqrt(PLASMA)),
    eps_hat=-1.0 / PLASMA + 0j,
    sweep_variable="k_plus",
    description="roles of the media exchanged; k₊ real, true eigenwavenumbers expected",
)

CASES: dict[str, MaterialCase] = {
    "positive":          POSITIVE,
    "plasmonic":         PLASMONIC,
    "reverse-plasmonic": REVERSE_PLASMONIC,
}


def get_case(name: str) -> MaterialCase:
    """
    Look up a material case by name.

    Raises:
        ValueError: If the name is not registered.
    """
    if name not in CASES:
        available = ", ".join(CASES.keys())
        raise ValueError(f"Unknown case '{name}'. Available: {available}")
    return CASES[name]


# ---------------------------------------------------------------------------
# Field scenes
# ---------------------------------------------------------------------------

SCENE_WAVENUMBER = 18.0

SCENES: dict[str, dict] = {
    "positive": {
        "shape": "teardrop", "panels": 50, "case": "positive",
        "k_minus": SCENE_WAVENUMBER + 0j, "direction": float(np.pi / 4),
    },
    "plasmonic": {
        "shape": "teardrop", "panels": 50, "case": "plasmonic",
        "k_minus": SCENE_WAVENUMBER + 0j, "direction": float(np.pi / 4), "homotopy": True,
    },
    "reverse-plasmonic": {
        "shape": "teardrop", "panels": 50, "case": "reverse-plasmonic",
        "k_minus": SCENE_WAVENUMBER / REVERSE_PLASMONIC.k_hat, "direction": float(np.pi / 4),
    },
}


def scene_config(name: str, base: ExperimentConfig = None) -> ExperimentConfig:
    """
    Config for a registered field scene on top of base.

    Raises:
        ValueError: If the scene is not registered.
    """
    if name not in SCENES:
        available = ", ".join(SCENES.keys())
        raise ValueError(f"Unknown scene '{name}'. Available: {available}")
    return dataclasses.replace(base or ExperimentConfig(), **SCENES[name])


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def material_case(config: ExperimentConfig) -> MaterialCase:
    """
    The MaterialCase a config describes.

    Explicit k_hat and eps_hat make a custom case (sweeping k₋) unless they
    equal the values of the named registered case. A registered name with
    other values is relabelled "custom"; an unregistered name is kept as the
    label.

    Raises:
        ConfigError: If the case is unknown or only one of k_hat/eps_hat is set.
    """
    if config.k_hat is not None and config.eps_hat is not None:
        k_hat, eps_hat = complex(config.k_hat), complex(config.eps_hat)
        named = CASES.get(config.case)
        if named is not None and (named.k_hat, named.eps_hat) == (k_hat, eps_hat):
            return named
        name = "custom" if named is not None or config.case is None else config.case
        if named is not None:
            logger.info("k_hat/eps_hat differ from case '%s'; using a custom case", config.case)
        return MaterialCase(name=name, k_hat=k_hat, eps_hat=eps_hat,
                            description="custom parameters")

    if (config.k_hat is None) != (config.eps_hat is None):
        raise ConfigError("k_hat and eps_hat must be given together",
                          field="k_hat" if config.k_hat is None else "eps_hat")
    if config.case is None or config.case not in CASES:
        raise ConfigError(f"Unknown case '{config.case}'. Available: {', '.join(CASES)}",
                          field="case")
    return CASES[config.case]


def resolve_config(config: ExperimentConfig) -> ExperimentConfig:
    """
    Fill k_hat / eps_hat from the case and default the homotopy switch.

    Homotopy is switched on when ε̂ is real negative and not set explicitly.
    """
    case = material_case(config)
    eps = complex(case.eps_hat)
    homotopy = config.homotopy
    if homotopy is None:
        homotopy = eps.imag == 0.0 and eps.real < 0.0
    return dataclasses.replace(config, case=case.name, k_hat=complex(case.k_hat),
                               eps_hat=eps, homotopy=homotopy)


def build_scene_curve(config: ExperimentConfig) -> Curve:
    """Curve named by config.shape with its shape parameters."""
    if config.shape not in CURVES:
        raise ConfigError(f"Unknown shape '{config.shape}'. Available: {', '.join(CURVES)}",
                          field="shape")
    kwargs = {
        "circle": {"radius": config.radius},
        "starfish": {"arms": config.arms, "amplitude": config.amplitude},
        "teardrop": {"opening_angle": config.opening_angle},
    }[config.shape]
    return build_curve(config.shape, **kwargs)


def build_scene_mesh(config: ExperimentConfig, panels: int = None) -> Mesh:
    """Mesh of the configured curve; panels overrides config.panels."""
    curve = build_scene_curve(config)
    grading = config.refine if curve.has_corners else 0
    return make_mesh(curve, panels or config.panels, grading=grading)
