"""
geometry/curves.py
==================
Built-in closed curves, parametrised over t ∈ [0, 1) and oriented
counter-clockwise.

  circle    R e^{2πit}
  starfish  (1 + a cos(2πmt)) e^{2πit}                       smooth, m arms
  teardrop  sin(πt) e^{i(t - 1/2)θ}                          one corner at 0

The teardrop has its corner at the origin (t = 0) with interior opening
angle exactly θ. θ = π gives the circle (1 - e^{2πit})/2 and no corner.

To add a shape:
  1. Write a make_<shape>() returning a Curve with vectorised z and z'
  2. Register it in CURVES at the bottom of this file
"""

import numpy as np

from core.exceptions import GeometryError
from core.models import Curve

TWO_PI = 2.0 * np.pi


def make_circle(radius: float = 1.0) -> Curve:
    """
    Counter-clockwise circle of the given radius centred at the origin.

    Raises:
        GeometryError: If radius <= 0.
    """
    if not radius > 0:
        raise GeometryError(f"Circle radius must be positive, got {radius}")

    def position(t):
        return radius * np.exp(TWO_PI * 1j * np.asarray(t))

    def derivative(t):
        return TWO_PI * 1j * radius * np.exp(TWO_PI * 1j * np.asarray(t))

    return Curve("circle", position, derivative, corners=[], parameters={"radius": radius})


def make_starfish(arms: int = 5, amplitude: float = 0.3) -> Curve:
    """
    Smooth star r(θ) = 1 + amplitude·cos(arms·θ).

    Raises:
        GeometryError: If arms < 1 or amplitude outside [0, 1).
    """
    if int(arms) != arms or arms < 1:
        raise GeometryError(f"Starfish needs a positive integer arm count, got {arms}")
    if not 0.0 <= amplitude < 1.0:
        raise GeometryError(f"Starfish amplitude must lie in [0, 1), got {amplitude}")
    arms = int(arms)

    def position(t):
        theta = TWO_PI * np.asarray(t)
        return (1.0 + amplitude * np.cos(arms * theta)) * np.exp(1j * theta)

    def derivative(t):
        theta = TWO_PI * np.asarray(t)
        r = 1.0 + amplitude * np.cos(arms * theta)
        dr = -amplitude * arms * np.sin(arms * theta)
        return TWO_PI * (dr + 1j * r) * np.exp(1j * theta)

    return Curve("starfish", position, derivative, corners=[],
                 parameters={"arms": arms, "amplitude": amplitude})


def make_teardrop(opening_angle: float = np.pi / 2) -> Curve:
    """
    One-corner drop with interior opening angle θ at the origin.

    Raises:
        GeometryError: If θ is outside (0, 2π).
    """
    theta = float(opening_angle)
    if not 0.0 < theta < TWO_PI:
        raise GeometryError(f"Teardrop opening angle must lie in (0, 2π), got {theta}")

    def position(t):
        t = np.asarray(t)
        return np.sin(np.pi * t) * np.exp(1j * (t - 0.5) * theta)

    def derivative(t):
        t = np.asarray(t)
        phase = np.exp(1j * (t - 0.5) * theta)
        return (np.pi * np.cos(np.pi * t) + 1j * theta * np.sin(np.pi * t)) * phase

    corners = [] if np.isclose(theta, np.pi, rtol=0.0, atol=1e-14) else [0.0]
    return Curve("teardrop", position, derivative, corners=corners,
                 parameters={"opening_angle": theta})


def corner_tangents(curve: Curve, corner: float, h: float = 0.0) -> tuple:
    """
    One-sided unit tangents at a corner parameter.

    Returns:
        (incoming, outgoing) unit tangents from t → corner⁻ and t → corner⁺.
        Both limits are read off z' at the parameter endpoints, so h = 0
        is exact for curves whose z' extends continuously to each side.
    """
    incoming = curve.derivative(np.array([corner + 1.0 - h]))[0]
    outgoing = curve.derivative(np.array([corner + h]))[0]
    return incoming / abs(incoming), outgoing / abs(outgoing)


def corner_angle(curve: Curve, corner: float) -> float:
    """Interior opening angle at a corner of a counter-clockwise curve."""
    incoming, outgoing = corner_tangents(curve, corner)
    # angle between the ray back along the incoming side and the outgoing ray
    return float(np.angle(-incoming / outgoing) % TWO_PI)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

CURVES: dict[str, callable] = {
    "circle":   make_circle,
    "starfish": make_starfish,
    "teardrop": make_teardrop,
}


def build_curve(name: str, **kwargs) -> Curve:
    """
    Build a registered curve by name.

    Raises:
        GeometryError: If the name is unknown.
    """
    if name not in CURVES:
        available = ", ".join(CURVES.keys())
        raise GeometryError(f"Unknown shape '{name}'. Available: {available}")
    return CURVES[name](**kwargs)
