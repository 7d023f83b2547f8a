"""
specfun/hankel.py
=================
Checked Hankel functions of the first kind, orders 0 and 1.

scipy.special.hankel1 (AMOS) does the evaluation. This wrapper enforces the
domain the solver relies on: arguments are k|x| with Im k ≥ 0, so they lie
in the closed upper half plane, never at the origin. Values that come back
non-finite are reported instead of silently propagating NaN into an
assembled matrix.
"""

import numpy as np
from scipy import special

from core.exceptions import SpecialFunctionError

# Arguments below the real axis by more than this are outside the
# upper-half-plane regime of k|x| with Im k ≥ 0.
IMAG_TOLERANCE = 1e-12

# |z| beyond this sits outside the validated accuracy band.
MAX_MODULUS = 1e3


def hankel1(order: int, z):
    """
    H_n^{(1)}(z) for n ∈ {0, 1}, vectorised over z.

    Args:
        order: 0 or 1.
        z: Complex scalar or array, z ≠ 0, Im z ≥ -IMAG_TOLERANCE·max(1, |z|).

    Returns:
        Complex scalar or array of the same shape as z.

    Raises:
        ValueError: If order is not 0 or 1.
        SpecialFunctionError: If z hits the origin, leaves the upper half
                              plane, or the evaluation overflows.
    """
    if order not in (0, 1):
        raise ValueError(f"hankel1 supports orders 0 and 1, got {order}")

    z_arr = np.asarray(z, dtype=complex)
    modulus = np.abs(z_arr)
    if np.any(modulus == 0.0):
        raise SpecialFunctionError("hankel1 is singular at z = 0")
    if np.any(z_arr.imag < -IMAG_TOLERANCE * np.maximum(1.0, modulus)):
        worst = z_arr.flat[np.argmin(z_arr.imag)]
        raise SpecialFunctionError(
            f"hankel1 argument {worst} lies below the real axis (requires Im k ≥ 0)"
        )
    if np.any(modulus > MAX_MODULUS):
        raise SpecialFunctionError(
            f"hankel1 argument modulus {modulus.max():.3e} exceeds {MAX_MODULUS:.0e}"
        )

    values = special.hankel1(order, z_arr)
    if not np.all(np.isfinite(values)):
        bad = z_arr[~np.isfinite(values)].flat[0]
        raise SpecialFunctionError(f"hankel1({order}, {bad}) overflowed")

    if np.ndim(z) == 0:
        return complex(values)
    return values


def bessel_j(order: int, z):
    """J_n(z) for complex z, n ∈ {0, 1}; entire, so no domain checks."""
    if order not in (0, 1):
        raise ValueError(f"bessel_j supports orders 0 and 1, got {order}")
    return special.jv(order, np.asarray(z, dtype=complex))
