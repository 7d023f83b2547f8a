"""
core/config.py
==============
Flat key=value experiment configuration.

    # comment
    shape = teardrop
    panels = 50
    case = plasmonic
    direction = south-west

Files are read first, then command-line overrides (--set key=value) are
applied in order. Every error names the line (for files) and the field.
"""

import dataclasses
import hashlib
import json
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from core import __version__
from core.exceptions import ConfigError
from core.models import ExperimentConfig

DIRECTIONS = {"south-west": float(np.pi / 4)}
SOLVERS = ("direct", "gmres")


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _none(text: str) -> bool:
    return text.lower() in ("none", "null", "")


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got '{text}'")


def parse_complex(text: str) -> complex:
    """Complex literal; "i" is accepted for the imaginary unit."""
    return complex(text.replace(" ", "").replace("i", "j"))


def _direction(text: str) -> float:
    return DIRECTIONS[text.lower()] if text.lower() in DIRECTIONS else float(text)


def _optional(parse: Callable) -> Callable:
    return lambda text: None if _none(text) else parse(text)


def _choice(options: Iterable[str]) -> Callable:
    options = tuple(options)

    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {list(options)}, got '{text}'")
        return text
    return parse


PARSERS: Dict[str, Callable[[str], object]] = {
    "shape": str,
    "radius": float,
    "arms": int,
    "amplitude": float,
    "opening_angle": float,
    "panels": int,
    "refine": int,
    "case": _optional(str),
    "k_minus": parse_complex,
    "k_hat": _optional(parse_complex),
    "eps_hat": _optional(parse_complex),
    "direction": _direction,
    "solver": _choice(SOLVERS),
    "gmres_tol": float,
    "gmres_maxiter": _optional(int),
    "homotopy": _optional(_bool),
    "homotopy_delta0": float,
    "homotopy_ratio": float,
    "homotopy_steps": int,
    "kmin": float,
    "kmax": float,
    "samples": int,
    "refine_peaks": _bool,
    "grid_nx": int,
    "grid_ny": int,
    "grid_margin": float,
    "gradient": _bool,
    "muller": _bool,
    "output_dir": str,
    "workers": int,
    "seed": int,
}


def _set(config: ExperimentConfig, key: str, text: str, line: Optional[int]) -> ExperimentConfig:
    key = key.strip().replace("-", "_")
    if key not in PARSERS:
        raise ConfigError(f"Unknown key. Available: {', '.join(sorted(PARSERS))}",
                          line=line, field=key)
    try:
        value = PARSERS[key](text.strip())
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"Malformed value '{text.strip()}': {exc}", line=line, field=key) from exc
    return dataclasses.replace(config, **{key: value})


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def parse_config_text(text: str, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """
    Parse key=value lines on top of base (default: ExperimentConfig()).

    Raises:
        ConfigError: On lines without '=', unknown keys or malformed values.
    """
    config = base or ExperimentConfig()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{line}'", line=number)
        key, value = line.split("=", 1)
        config = _set(config, key, value, number)
    return config


def apply_overrides(config: ExperimentConfig, overrides: Iterable[str]) -> ExperimentConfig:
    """Apply 'key=value' strings in order."""
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"Override must be 'key=value', got '{item}'")
        key, value = item.split("=", 1)
        config = _set(config, key, value, None)
    return config


def load_config(path: Optional[str] = None, overrides: Iterable[str] = (),
                base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """
    Build and validate an ExperimentConfig from base, a file and overrides.

    Raises:
        ConfigError: On parse or validation errors.
    """
    config = base or ExperimentConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"Cannot read config file '{path}': {exc}") from exc
        config = parse_config_text(text, config)
    config = apply_overrides(config, overrides)
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    """
    Range checks that do not need the case registry.

    Raises:
        ConfigError: Naming the first offending field.
    """
    checks = (
        ("panels", config.panels >= 4, "must be at least 4"),
        ("refine", config.refine >= 0, "must be non-negative"),
        ("samples", config.samples >= 1, "must be at least 1"),
        ("kmax", 0.0 <= config.kmin < config.kmax, "must satisfy 0 <= kmin < kmax"),
        ("radius", config.radius > 0.0, "must be positive"),
        ("gmres_tol", config.gmres_tol >= float(np.finfo(float).eps), "must be >= machine epsilon"),
        ("homotopy_ratio", 0.0 < config.homotopy_ratio < 1.0, "must lie in (0, 1)"),
        ("homotopy_delta0", config.homotopy_delta0 > 0.0, "must be positive"),
        ("homotopy_steps", config.homotopy_steps >= 1, "must be at least 1"),
        ("grid_nx", config.grid_nx >= 1 and config.grid_ny >= 1, "grid dimensions must be >= 1"),
        ("workers", config.workers >= 1, "must be at least 1"),
    )
    for name, ok, message in checks:
        if not ok:
            raise ConfigError(f"{message} (got {getattr(config, name)})", field=name)


# ---------------------------------------------------------------------------
# Provenance
# ---------------------------------------------------------------------------

def _plain(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def config_dict(config: ExperimentConfig) -> dict:
    """JSON-ready dict; complex values become [re, im]."""
    return {key: _plain(value) for key, value in dataclasses.asdict(config).items()}


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form of the config and code version."""
    payload = json.dumps({"config": config_dict(config), "version": __version__},
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
