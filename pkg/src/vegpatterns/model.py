"""Reaction kinetics, homogeneous equilibria and the 3x3 reaction Jacobian.

Everything here is closed-form algebra on spatially uniform states; the
discretized operators build on these pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .params import ModelParams

#: scale-invariant tolerance for treating the discriminant as a double root
DOUBLE_ROOT_RTOL = 1e-10

#: residual bound enforced on every constructed equilibrium
EQUILIBRIUM_RESIDUAL = 1e-12


def reaction(u, p: float, params: ModelParams):
    """Reaction rates (f, g, h) at state ``u = (B, W, T)``.

    f = c*B^2*W - (d + s*T)*B
    g = p - r*B^2*W - l*W
    h = q*(d + s*T)*B - (k + w*p)*T

    Exact algebraic evaluation, no clipping.
    """
    B, W, T = u
    if not all(math.isfinite(v) for v in (B, W, T, p)):
        raise InvalidArgumentError(f"non-finite reaction input: u={u!r}, p={p!r}")
    if p < 0:
        raise InvalidArgumentError(f"precipitation rate must be >= 0, got {p}")
    pr = params
    f = pr.c * B * B * W - (pr.d + pr.s * T) * B
    g = p - pr.r * B * B * W - pr.l * W
    h = pr.q * (pr.d + pr.s * T) * B - (pr.k + pr.w * p) * T
    return (f, g, h)


def reaction_jacobian(u, p: float, params: ModelParams) -> np.ndarray:
    """Closed-form partial derivatives of (f, g, h) w.r.t. (B, W, T)."""
    B, W, T = u
    if not all(math.isfinite(v) for v in (B, W, T, p)):
        raise InvalidArgumentError(f"non-finite Jacobian input: u={u!r}, p={p!r}")
    pr = params
    return np.array([
        [2 * pr.c * B * W - pr.d - pr.s * T, pr.c * B * B, -pr.s * B],
        [-2 * pr.r * B * W, -pr.r * B * B - pr.l, 0.0],
        [pr.q * (pr.d + pr.s * T), 0.0, pr.q * pr.s * B - (pr.k + pr.w * p)],
    ])


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of the vegetated-equilibrium quadratic a2*B^2 + a1*B + a0 = 0."""

    a2: float
    a1: float
    a0: float

    @property
    def discriminant(self) -> float:
        return self.a1 * self.a1 - 4.0 * self.a0 * self.a2

    def roots(self):
        """Real roots, numerically stable against cancellation (a1 < 0 case).

        Returns a tuple (larger, smaller) when the discriminant is positive,
        the double root twice when it vanishes within DOUBLE_ROOT_RTOL, and
        () otherwise.
        """
        disc = self.discriminant
        scale = self.a1 * self.a1
        if disc <= 0.0:
            if scale > 0 and abs(disc) <= DOUBLE_ROOT_RTOL * scale:
                b = -self.a1 / (2.0 * self.a2)
                return (b, b)
            return ()
        sq = math.sqrt(disc)
        # q-formula: with a1 < 0 the sum -a1 + sq has no cancellation
        qq = -(self.a1 - sq) / 2.0 if self.a1 < 0 else -(self.a1 + sq) / 2.0
        r1, r2 = qq / self.a2, self.a0 / qq
        return (max(r1, r2), min(r1, r2))


def quadratic_coeffs(p: float, params: ModelParams) -> QuadraticCoeffs:
    """a2 = s*q*c*p + d*r*(k+w*p); a1 = -(k+w*p)*c*p; a0 = (k+w*p)*d*l."""
    if not math.isfinite(p) or p < 0:
        raise InvalidArgumentError(f"precipitation rate must be finite and >= 0, got {p}")
    pr = params
    m = pr.k + pr.w * p
    return QuadraticCoeffs(
        a2=pr.s * pr.q * pr.c * p + pr.d * pr.r * m,
        a1=-m * pr.c * p,
        a0=m * pr.d * pr.l,
    )


@dataclass(frozen=True)
class HomogeneousState:
    """A spatially uniform equilibrium with its branch provenance."""

    B: float
    W: float
    T: float
    branch_tag: str  # "bare_soil" | "upper" | "lower"

    def as_tuple(self):
        return (self.B, self.W, self.T)


def _make_state(B, W, T, tag, p, params) -> HomogeneousState:
    res = max(abs(v) for v in reaction((B, W, T), p, params))
    if res >= EQUILIBRIUM_RESIDUAL:
        raise InvalidArgumentError(
            f"candidate equilibrium ({B}, {W}, {T}) at p={p} has residual {res:.3e}"
        )
    return HomogeneousState(B, W, T, tag)


def homogeneous_equilibria(p: float, params: ModelParams):
    """All uniform equilibria at precipitation ``p``.

    Always contains the bare-soil state (0, p/l, 0).  When the quadratic
    discriminant is positive two vegetated branches are appended, tagged
    ``upper`` and ``lower`` by biomass; a double root yields a single state
    tagged ``upper``.  Candidate roots with B < 0 (possible for exotic
    parameter sets) are dropped and reported in the ``diagnostics`` list
    attached to the returned list.
    """
    if not math.isfinite(p) or p < 0:
        raise InvalidArgumentError(f"precipitation rate must be finite and >= 0, got {p}")
    pr = params
    states = [_make_state(0.0, p / pr.l, 0.0, "bare_soil", p, params)]
    diagnostics = []
    cc = quadratic_coeffs(p, params)
    roots = cc.roots()
    if roots:
        if roots[0] == roots[1]:
            candidates = [(roots[0], "upper")]
        else:
            candidates = [(roots[0], "upper"), (roots[1], "lower")]
        for B, tag in candidates:
            if B < 0:
                diagnostics.append(f"negative biomass root {B:.6g} at p={p:.6g} dropped")
                continue
            W = p / (pr.r * B * B + pr.l)
            T = (pr.c * B * W - pr.d) / pr.s
            states.append(_make_state(B, W, T, tag, p, params))
    out = list(states)
    # report-only channel; empty for the default parameter regime
    out = _DiagnosticList(out)
    out.diagnostics = diagnostics
    return out


class _DiagnosticList(list):
    """List of states with an attached diagnostics attribute."""

    diagnostics: list


def fold_precipitation(params: ModelParams, p_max: float = 2.0) -> float:
    """Smallest p > 0 where the quadratic discriminant vanishes (the fold).

    Located by bracketing the sign change of the discriminant on a uniform
    grid and bisecting to machine tolerance.
    """
    def disc(p):
        return quadratic_coeffs(p, params).discriminant

    ps = np.linspace(1e-9, p_max, 4001)
    vals = np.array([disc(p) for p in ps])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(idx) == 0:
        raise InvalidArgumentError(
            f"no fold of the vegetated branches in (0, {p_max}] for these parameters"
        )
    lo, hi = ps[idx[0]], ps[idx[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if disc(lo) * disc(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def double_root_biomass(params: ModelParams, p_max: float = 2.0) -> float:
    """Biomass -a1/(2*a2) at the fold precipitation."""
    pc0 = fold_precipitation(params, p_max)
    cc = quadratic_coeffs(pc0, params)
    return -cc.a1 / (2.0 * cc.a2)
