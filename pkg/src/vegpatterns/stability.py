"""Mode-wise linear stability of uniform states.

Per wavenumber ``k = n*pi/L`` the linearization is the 3x3 matrix
``A = J(u0) - diag(D_B, D_W, 0) * k^2``; its characteristic cubic feeds the
Routh-Hurwitz test, and the zero-crossing of -det(A) along the upper
vegetated branch defines the pattern-onset locus in ``p``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, InvalidArgumentError
from .model import HomogeneousState, fold_precipitation, homogeneous_equilibria, reaction
from .params import ModelParams

#: refinement targets for the onset roots
ROOT_RESIDUAL = 1e-10
ROOT_BRACKET = 1e-8

#: residual bound for accepting u0 as an equilibrium
_EQUILIBRIUM_TOL = 1e-8


@dataclass(frozen=True)
class ModeMatrix:
    n: int
    k2: float
    A: np.ndarray


@dataclass(frozen=True)
class CharCoeffs:
    """Coefficients of lambda^3 + c2*lambda^2 + c1*lambda + c0."""

    c2: float
    c1: float
    c0: float


@dataclass
class ModeReport:
    n: int
    coeffs: CharCoeffs
    routh_hurwitz_pass: bool
    leading_real_part: float


@dataclass
class StabilityReport:
    modes: list[ModeReport]
    stable: bool
    first_violating_mode: int | None = None

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "first_violating_mode": self.first_violating_mode,
            "modes": [
                {
                    "n": m.n,
                    "c2": m.coeffs.c2,
                    "c1": m.coeffs.c1,
                    "c0": m.coeffs.c0,
                    "routh_hurwitz_pass": m.routh_hurwitz_pass,
                    "leading_real_part": m.leading_real_part,
                }
                for m in self.modes
            ],
        }


def wavenumber_sq(n: int, L: float) -> float:
    return (n * math.pi / L) ** 2


def mode_matrix(u0: HomogeneousState, p: float, n: int, params: ModelParams) -> ModeMatrix:
    """Per-mode linearization at an equilibrium.

    Vegetated states use the equilibrium-simplified entries (first diagonal
    entry c*B0*W0, second -p/W0, third row q*c*W0*B0); bare soil uses its
    lower-triangular form.  Rejects states whose reaction residual exceeds
    1e-8.
    """
    res = max(abs(v) for v in reaction(u0.as_tuple(), p, params))
    if res > _EQUILIBRIUM_TOL:
        raise InvalidArgumentError(
            f"u0 is not an equilibrium at p={p}: residual {res:.3e}"
        )
    pr = params
    k2 = wavenumber_sq(n, pr.L)
    decay = pr.k + pr.w * p
    if u0.B == 0.0:
        A = np.array([
            [-pr.d - pr.D_B * k2, 0.0, 0.0],
            [0.0, -pr.l - pr.D_W * k2, 0.0],
            [pr.q * pr.d, 0.0, -decay],
        ])
    else:
        B0, W0 = u0.B, u0.W
        A = np.array([
            [pr.c * B0 * W0 - pr.D_B * k2, pr.c * B0 * B0, -pr.s * B0],
            [-2.0 * pr.r * B0 * W0, -p / W0 - pr.D_W * k2, 0.0],
            [pr.q * pr.c * W0 * B0, 0.0, pr.q * pr.s * B0 - decay],
        ])
    return ModeMatrix(n=n, k2=k2, A=A)


def char_coeffs(A: np.ndarray) -> CharCoeffs:
    """c2 = -tr(A), c1 = (tr(A)^2 - tr(A^2))/2, c0 = -det(A)."""
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    tr2 = np.trace(A @ A)
    det = (
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )
    return CharCoeffs(c2=float(-tr), c1=float(0.5 * (tr * tr - tr2)),
                      c0=float(-det))


def routh_hurwitz(cc: CharCoeffs) -> bool:
    """Strict stability conditions c2 > 0, c0 > 0, c2*c1 > c0 for the cubic."""
    for v in (cc.c2, cc.c1, cc.c0):
        if not math.isfinite(v):
            raise InvalidArgumentError(f"non-finite characteristic coefficients: {cc}")
    return bool(cc.c2 > 0.0 and cc.c0 > 0.0 and cc.c2 * cc.c1 > cc.c0)


def cubic_eigenvalues(cc: CharCoeffs):
    """Roots of the characteristic cubic, deterministic closed form.

    Uses the trigonometric method for three real roots and Cardano otherwise;
    near-degenerate discriminants fall back to the companion matrix.
    """
    b, c, d = cc.c2, cc.c1, cc.c0
    # depressed cubic t^3 + pt + q with lambda = t - b/3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = -4.0 * p**3 - 27.0 * q * q
    scale = max(abs(p) ** 3, q * q, 1e-300)
    if abs(disc) < 1e-8 * scale:
        return tuple(np.roots([1.0, b, c, d]))
    if disc > 0.0:
        # three distinct real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        return tuple(
            m * math.cos(theta - 2.0 * math.pi * j / 3.0) + shift for j in range(3)
        )
    # one real root, complex pair; branch chosen to avoid cancellation in -q/2
    rad = cmath.sqrt(q * q / 4.0 + p**3 / 27.0)
    u3 = -q / 2.0 - rad if q >= 0 else -q / 2.0 + rad
    u = u3 ** (1.0 / 3.0)
    if abs(u) < 1e-150:
        return tuple(np.roots([1.0, b, c, d]))
    w = -1.0 / 2.0 + 1j * math.sqrt(3.0) / 2.0
    roots = []
    for j in range(3):
        uj = u * w**j
        roots.append(uj - p / (3.0 * uj) + shift)
    return tuple(roots)


def mode_eigenvalues(mm: ModeMatrix):
    return cubic_eigenvalues(char_coeffs(mm.A))


def homogeneous_stability(
    u0: HomogeneousState,
    p: float,
    params: ModelParams,
    n_max: int = 64,
    cross_check_tol: float = 1e-9,
) -> StabilityReport:
    """Routh-Hurwitz verdict per mode n = 0..n_max with an eigenvalue cross-check.

    Each mode's verdict is validated against the explicitly computed
    eigenvalues of its matrix; a disagreement outside ``cross_check_tol`` on
    the leading real part raises :class:`ConsistencyError`.
    """
    if n_max < 1:
        raise InvalidArgumentError(f"n_max must be >= 1, got {n_max}")
    modes = []
    stable = True
    first_bad = None
    for n in range(0, n_max + 1):
        mm = mode_matrix(u0, p, n, params)
        cc = char_coeffs(mm.A)
        ok = routh_hurwitz(cc)
        lam = cubic_eigenvalues(cc)
        lead = max(z.real if isinstance(z, complex) else z for z in lam)
        if ok != (lead < 0.0) and abs(lead) > cross_check_tol:
            raise ConsistencyError(
                f"mode n={n}: Routh-Hurwitz={ok} but leading eigenvalue "
                f"real part {lead:.3e}"
            )
        modes.append(ModeReport(n=n, coeffs=cc, routh_hurwitz_pass=ok,
                                leading_real_part=float(lead)))
        if not ok and first_bad is None:
            first_bad = n
            stable = False
    return StabilityReport(modes=modes, stable=stable, first_violating_mode=first_bad)


def _upper_state(p: float, params: ModelParams) -> HomogeneousState | None:
    for st in homogeneous_equilibria(p, params):
        if st.branch_tag == "upper":
            return st
    return None


def _mode_det(B0, W0, p, k2, params: ModelParams):
    """det(A) for the simplified vegetated mode matrix, vectorizable.

    Cofactor expansion along the third row/column; all arguments may be
    arrays of matching shape.
    """
    pr = params
    a11 = pr.c * B0 * W0 - pr.D_B * k2
    a12 = pr.c * B0 * B0
    a13 = -pr.s * B0
    a21 = -2.0 * pr.r * B0 * W0
    a22 = -p / W0 - pr.D_W * k2
    a33 = pr.q * pr.s * B0 - (pr.k + pr.w * p)
    a31 = pr.q * pr.c * W0 * B0
    return a33 * (a11 * a22 - a12 * a21) + a31 * (-a13 * a22)


def _upper_branch_grid(ps: np.ndarray, params: ModelParams):
    """(B, W) of the upper vegetated branch over an array of p > p_c0."""
    pr = params
    m = pr.k + pr.w * ps
    a2 = pr.s * pr.q * pr.c * ps + pr.d * pr.r * m
    a1 = -m * pr.c * ps
    a0 = m * pr.d * pr.l
    disc = a1 * a1 - 4.0 * a0 * a2
    disc = np.maximum(disc, 0.0)
    qq = -(a1 - np.sqrt(disc)) / 2.0
    B = qq / a2
    W = ps / (pr.r * B * B + pr.l)
    return B, W


def onset_objective(p: float, k2: float, params: ModelParams) -> float:
    """det(A) of the upper-branch mode matrix at squared wavenumber ``k2``.

    The stability boundary is the zero set of this function (onset of a real
    eigenvalue crossing).
    """
    st = _upper_state(p, params)
    if st is None:
        raise InvalidArgumentError(f"no vegetated equilibrium at p={p}")
    return float(_mode_det(st.B, st.W, p, k2, params))


def onset_objective_grid(ps: np.ndarray, k2: float, params: ModelParams) -> np.ndarray:
    """Vectorized onset objective along the upper branch."""
    B, W = _upper_branch_grid(ps, params)
    return _mode_det(B, W, ps, k2, params)


@dataclass(frozen=True)
class TuringRoot:
    n: int
    p_c: float
    onset: bool  # largest root for this mode


def _refine_root(f, lo, hi) -> float:
    """Bisection to ROOT_BRACKET width, then secant polish to ROOT_RESIDUAL."""
    flo, fhi = f(lo), f(hi)
    for _ in range(200):
        if hi - lo < ROOT_BRACKET:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    a, b = lo, hi
    fa, fb = flo, fhi
    for _ in range(60):
        if fb == fa:
            break
        x = b - fb * (b - a) / (fb - fa)
        if not (lo - ROOT_BRACKET <= x <= hi + ROOT_BRACKET):
            break
        fx = f(x)
        a, fa, b, fb = b, fb, x, fx
        if abs(fx) < ROOT_RESIDUAL:
            return x
    return 0.5 * (lo + hi)


def turing_roots(n: int, L: float, params: ModelParams, p_max: float = 2.0,
                 samples: int = 2001) -> list[TuringRoot]:
    """All roots of the onset objective for mode ``n`` in (p_c0, p_max].

    The objective is sampled densely to bracket sign changes before
    refinement; the largest root is flagged as the onset (the crossing met
    first when lowering p from the stable regime).
    """
    pc0 = fold_precipitation(params, p_max)
    k2 = wavenumber_sq(n, L)

    def f(p):
        return onset_objective(p, k2, params)

    ps = np.linspace(pc0 + 1e-6, p_max, samples)
    vals = onset_objective_grid(ps, k2, params)
    roots = []
    for i in range(len(ps) - 1):
        if vals[i] == 0.0:
            roots.append(ps[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_refine_root(f, ps[i], ps[i + 1]))
    if vals[-1] == 0.0:
        roots.append(ps[-1])
    roots.sort()
    return [
        TuringRoot(n=n, p_c=x, onset=(i == len(roots) - 1))
        for i, x in enumerate(roots)
    ]


def turing_locus(n: int, L: float, params: ModelParams, p_max: float = 2.0):
    """Onset precipitation for mode ``n`` on domain length ``L``, or None.

    Returns the largest root of the onset objective; absence of a sign
    change is a valid result (mode never destabilizes).
    """
    roots = turing_roots(n, L, params, p_max)
    return roots[-1].p_c if roots else None


def turing_scan(L: float, n_max: int, params: ModelParams, p_max: float = 2.0):
    """(n, onset or None) for n = 1..n_max."""
    if n_max < 1:
        raise InvalidArgumentError(f"n_max must be >= 1, got {n_max}")
    return [(n, turing_locus(n, L, params, p_max)) for n in range(1, n_max + 1)]


def critical_domain_size(params: ModelParams, bracket=(0.1, 20.0),
                         samples: int = 4000, p_max: float = 2.0):
    """Domain length where the n=1 mode sits exactly at the fold.

    Solves ``onset_objective(p_c0, (pi/L)^2) = 0`` for L by bracketing on a
    grid over ``bracket`` and bisecting to width 1e-6.  Returns None when no
    sign change exists in the bracket.
    """
    pc0 = fold_precipitation(params, p_max)
    state = _upper_state(pc0, params)

    def f(L):
        return float(_mode_det(state.B, state.W, pc0,
                               wavenumber_sq(1, L), params))

    Ls = np.linspace(bracket[0], bracket[1], samples)
    vals = _mode_det(state.B, state.W, pc0, (np.pi / Ls) ** 2, params)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(idx) == 0:
        return None
    lo, hi = Ls[idx[0]], Ls[idx[0] + 1]
    flo = f(lo)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)
