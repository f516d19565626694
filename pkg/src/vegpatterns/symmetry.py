"""Reflection-symmetry machinery: x -> L - x on the discrete grid.

The dynamics are equivariant under this reflection, so steady profiles come
either reflection-symmetric (bell, inverted bell) or in conjugate
left/right pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FieldState

#: relative defect below which a profile counts as reflection-symmetric
SYMMETRY_TOL = 1e-6

#: relative spread below which a biomass profile counts as flat
FLAT_TOL = 1e-8


@dataclass(frozen=True)
class SymmetryReport:
    defect: float
    classification: str   # "symmetric" | "asymmetric"
    profile_shape: str    # bell | inverted_bell | skewed_left | skewed_right | flat | other


def reflect(state: FieldState) -> FieldState:
    """Node-wise reversal of all three fields; an exact involution."""
    return FieldState(state.grid, state.B[::-1].copy(), state.W[::-1].copy(),
                      state.T[::-1].copy())


def _mirror_sumsq(a: np.ndarray) -> float:
    """Sum of squares accumulated over reflection pairs.

    Pair sums are commutative, so the result is bitwise invariant under
    reversing the array; a plain sum is not.
    """
    sq = a * a
    half = len(a) // 2
    total = float(np.sum(sq[:half] + sq[: -half - 1 : -1])) if half else 0.0
    if len(a) % 2:
        total += float(sq[half])
    return total


def symmetry_defect(state: FieldState) -> float:
    """|| U - reflect(U) ||_2 / || U ||_2 over the stacked fields."""
    num = den = 0.0
    for a in (state.B, state.W, state.T):
        num += _mirror_sumsq(a - a[::-1])
        den += _mirror_sumsq(a)
    if den == 0.0:
        return 0.0
    return float(np.sqrt(num / den))


def _center_value(arr: np.ndarray) -> float:
    n = len(arr)
    if n % 2 == 1:
        return float(arr[n // 2])
    return 0.5 * float(arr[n // 2 - 1] + arr[n // 2])


def first_moment(state: FieldState) -> float:
    """Trapezoid integral of (x - L/2) * B(x); negative means mass on the left."""
    g = state.grid
    w = g.trapezoid_weights()
    return float(np.sum(w * (g.x - g.L / 2.0) * state.B))


def classify(state: FieldState) -> SymmetryReport:
    """Defect plus a shape heuristic on the biomass profile.

    Shape labels are meaningful for steady states; the defect is defined for
    any field.  Water and toxin profiles do not enter the heuristic.
    """
    defect = symmetry_defect(state)
    symmetric = defect < SYMMETRY_TOL
    B = state.B
    spread = float(B.max() - B.min())
    mean = abs(float(B.mean()))
    if spread <= FLAT_TOL * max(mean, 1e-30):
        shape = "flat"
    elif symmetric:
        center = _center_value(B)
        edge = float(B[0])
        if center > edge:
            shape = "bell"
        elif center < edge:
            shape = "inverted_bell"
        else:
            shape = "other"
    else:
        m1 = first_moment(state)
        if m1 < 0:
            shape = "skewed_left"
        elif m1 > 0:
            shape = "skewed_right"
        else:
            shape = "other"
    return SymmetryReport(
        defect=defect,
        classification="symmetric" if symmetric else "asymmetric",
        profile_shape=shape,
    )


def near_onset_shape(n: int) -> str:
    """Symmetry of the pattern emerging at mode ``n``.

    Even modes keep the profile symmetric about L/2 (full spatial period);
    odd modes give the half-period profile, a skewed left or right half
    cosine.
    """
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return "symmetric" if n % 2 == 0 else "half_period"
