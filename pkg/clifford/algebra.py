"""
clifford/algebra.py
===================
Exact multivector algebra on ∧R² and ∧R³.

A basis multivector e_s is indexed by a subset s ⊆ {1..n}, stored as a
bitmask. All products reduce to the sign of the permutation that sorts the
concatenated index lists:

    e_s e_t  = ε(s, t) e_{s Δ t}            (Clifford product, e_i e_i = 1)
    e_s ∧ e_t = ε(s, t) e_{s ∪ t}            if s ∩ t = ∅, else 0
    e_s ⌟ e_t = ε(s, t∖s) e_{t∖s}            if s ⊆ t,     else 0

where ε(s, t) = (-1)^#{(i, j) : i ∈ s, j ∈ t, i > j}.

The operator assembly in operators/cauchy.py writes E_k in the frame
{1, ντ, ν, τ}; this module is what the self-test and phase-1 tests use to
check the identities that block layout relies on.
"""

from typing import Callable, Sequence

import numpy as np

from core.models import Multivector, _check_same_dim


# ---------------------------------------------------------------------------
# Index bookkeeping
# ---------------------------------------------------------------------------

def _sign(s: int, t: int) -> int:
    """Permutation sign ε(s, t) for bitmask index sets."""
    inversions = 0
    i = 0
    while (s >> i) != 0:
        if (s >> i) & 1:
            inversions += bin(t & ((1 << i) - 1)).count("1")
        i += 1
    return -1 if inversions % 2 else 1


def _grade_of(s: int) -> int:
    return bin(s).count("1")


def _bilinear(u: Multivector, w: Multivector, rule: Callable[[int, int], tuple]) -> Multivector:
    """Extend a basis-level product rule(s, t) -> (sign, index) bilinearly."""
    _check_same_dim(u, w)
    out = np.zeros(1 << u.dim, dtype=complex)
    for s in np.flatnonzero(u.coeffs):
        for t in np.flatnonzero(w.coeffs):
            sign, index = rule(int(s), int(t))
            if sign:
                out[index] += sign * u.coeffs[s] * w.coeffs[t]
    return Multivector(u.dim, out)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def basis(dim: int, indices: Sequence[int] = ()) -> Multivector:
    """
    Basis multivector e_s for an index tuple such as (1, 2).

    Indices may be given in any order; the result carries the sign of the
    sorting permutation, so basis(2, (2, 1)) == -e12.
    """
    coeffs = np.zeros(1 << dim, dtype=complex)
    mask = 0
    sign = 1
    for i in indices:
        if not 1 <= i <= dim:
            raise ValueError(f"Basis index {i} out of range for dimension {dim}")
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"Repeated basis index {i} in {tuple(indices)}")
        sign *= _sign(mask, bit)
        mask |= bit
    coeffs[mask] = sign
    return Multivector(dim, coeffs)


def scalar(dim: int, value: complex) -> Multivector:
    """Grade-0 multivector."""
    coeffs = np.zeros(1 << dim, dtype=complex)
    coeffs[0] = value
    return Multivector(dim, coeffs)


def vector(dim: int, components: Sequence[complex]) -> Multivector:
    """Grade-1 multivector Σ c_i e_i."""
    if len(components) != dim:
        raise ValueError(f"Expected {dim} vector components, got {len(components)}")
    coeffs = np.zeros(1 << dim, dtype=complex)
    for i, c in enumerate(components):
        coeffs[1 << i] = c
    return Multivector(dim, coeffs)


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

def wedge(u: Multivector, w: Multivector) -> Multivector:
    """Exterior product u ∧ w."""
    return _bilinear(u, w, lambda s, t: (0, 0) if s & t else (_sign(s, t), s | t))


def lcontract(u: Multivector, w: Multivector) -> Multivector:
    """Left interior product u ⌟ w."""
    def rule(s: int, t: int) -> tuple:
        if s & ~t:
            return 0, 0
        rest = t & ~s
        return _sign(s, rest), rest
    return _bilinear(u, w, rule)


def clifford_mul(u: Multivector, w: Multivector) -> Multivector:
    """Clifford product uw with e_i e_i = 1."""
    return _bilinear(u, w, lambda s, t: (_sign(s, t), s ^ t))


# ---------------------------------------------------------------------------
# Unary operations
# ---------------------------------------------------------------------------

def hodge_star(w: Multivector) -> Multivector:
    """Hodge star *w = w ⌟ e_{1..n}."""
    return lcontract(w, basis(w.dim, range(1, w.dim + 1)))


def involution(w: Multivector) -> Multivector:
    """Grade involution: the grade-j part is multiplied by (-1)^j."""
    signs = np.array([(-1) ** _grade_of(s) for s in range(1 << w.dim)])
    return Multivector(w.dim, w.coeffs * signs)


def grade(w: Multivector, j: int) -> Multivector:
    """Grade-j part of w."""
    mask = np.array([_grade_of(s) == j for s in range(1 << w.dim)])
    return Multivector(w.dim, np.where(mask, w.coeffs, 0))


# ---------------------------------------------------------------------------
# Differential operator
# ---------------------------------------------------------------------------

def dirac_apply(field: Callable[[np.ndarray], Multivector], x: Sequence[float],
                h: float = 1e-4) -> Multivector:
    """
    Clifford derivative D F(x) = Σ_j e_j ∂_j F(x) by central differences.

    Args:
        field: Function of a real point (length dim) returning a Multivector.
        x: Evaluation point.
        h: Difference step.

    Returns:
        Multivector approximation of D F at x (error O(h²)).
    """
    x = np.asarray(x, dtype=float)
    dim = len(x)
    result = scalar(dim, 0.0)
    for j in range(dim):
        step = np.zeros(dim)
        step[j] = h
        derivative = (field(x + step) - field(x - step)) * (1.0 / (2.0 * h))
        result = result + clifford_mul(basis(dim, (j + 1,)), derivative)
    return result
