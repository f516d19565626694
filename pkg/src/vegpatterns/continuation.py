"""Pseudo-arclength continuation of discretized steady states in p.

Tangent predictor, Newton corrector on the hyperplane-augmented system,
adaptive step control, eigenvalue monitoring, fold / branch-point test
functions with bisection refinement, branch switching through the critical
null direction, and the orchestrated full diagram.

The arclength metric weights state components with trapezoid weights divided
by the domain length (so it is grid-resolution independent) and the
parameter with unit weight.  Reported tangents are renormalized to unit
Euclidean length.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, InvalidArgumentError
from .grid import FieldState, GridSpec
from .linalg import null_direction, rightmost_eigenvalues, sparse_sign_det
from .model import fold_precipitation, homogeneous_equilibria
from .params import ModelParams
from .semidiscrete import KL, KU, jacobian_band, rhs_dp, rhs_flat
from .symmetry import classify, first_moment, reflect

CORRECTOR_TOL_F = 1e-8
CORRECTOR_TOL_DX = 1e-8
CORRECTOR_MAX_ITER = 12
FOLD_TEST_TOL = 1e-8
EVENT_STATE_TOL = 1e-3   # state distance merging duplicate events
EVENT_P_TOL = 1e-4


@dataclass
class ContinuationOptions:
    h0: float = 0.02
    h_min: float = 1e-5
    h_max: float = 0.1
    grow_factor: float = 1.3
    fast_iterations: int = 4
    max_steps: int = 3000
    p_min: float = 0.0
    p_max: float = 2.0
    eig_count: int = 12
    unstable_tol: float = 1e-9
    closed_loop_after: int = 20
    max_switch_depth: int = 2


@dataclass
class BranchPoint:
    """One converged point on a continuation curve."""

    state: FieldState
    p: float
    tangent: np.ndarray          # unit Euclidean norm, length 3(N+1)+1
    measures: dict
    n_unstable: int
    tau_fold: float              # p-component of the stepping tangent
    tau_branch: int              # sign of det of the augmented Jacobian

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.state.as_flat(), [self.p]])


@dataclass
class BifurcationEvent:
    kind: str                    # "fold" | "branch_point" | "turing_onset"
    p_refined: float
    state_refined: FieldState
    label: str = ""
    branch_label: str = ""
    detection_interval: tuple = (0.0, 0.0)
    test_value: float = 0.0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "p": self.p_refined,
            "branch": self.branch_label,
            "detection_interval": list(self.detection_interval),
            "test_value": self.test_value,
        }


@dataclass
class Branch:
    points: list[BranchPoint]
    provenance: str
    events: list[BifurcationEvent] = field(default_factory=list)
    termination: str = ""
    depth: int = 0
    label: str = ""
    conjugate_of: str | None = None   # reflection image of another branch
    duplicate_of: str | None = None   # same curve traced twice

    @property
    def p_values(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    def nearest_point(self, p: float) -> BranchPoint:
        i = int(np.argmin(np.abs(self.p_values - p)))
        return self.points[i]

    def passes_through(self, p: float, p_slack: float):
        """Nearest point of every distinct traversal of the window around p.

        A traced curve can run through the same parameter value several
        times (stable and unstable arcs); each contiguous run of points
        inside the window yields one representative.
        """
        pv = self.p_values
        idx = np.nonzero(np.abs(pv - p) <= p_slack)[0]
        if len(idx) == 0:
            return []
        reps = []
        start = 0
        breaks = np.nonzero(np.diff(idx) > 1)[0]
        for stop in list(breaks) + [len(idx) - 1]:
            cluster = idx[start:stop + 1]
            best = cluster[int(np.argmin(np.abs(pv[cluster] - p)))]
            reps.append(self.points[best])
            start = stop + 1
        return reps


class Problem:
    """Discretized steady-state system F(U, p) = 0 with its metric."""

    def __init__(self, params: ModelParams, grid: GridSpec):
        self.params = params
        self.grid = grid
        self.m = 3 * grid.n_nodes
        wn = grid.trapezoid_weights() / grid.L
        self.w_state = np.repeat(wn, 3)

    # --- metric ---------------------------------------------------------

    def dot(self, a, b) -> float:
        return float(a[:-1] @ (self.w_state * b[:-1]) + a[-1] * b[-1])

    def norm(self, a) -> float:
        return math.sqrt(self.dot(a, a))

    # --- residuals and Jacobians ----------------------------------------

    def F(self, x) -> np.ndarray:
        return rhs_flat(x[:-1], x[-1], self.params, self.grid)

    def jac_band(self, x) -> np.ndarray:
        return jacobian_band(x[:-1], x[-1], self.params, self.grid)

    def augmented_jacobian(self, x, v) -> sp.csc_matrix:
        """[[dF/dU, dF/dp], [metric row of v]] as sparse CSC."""
        m = self.m
        band = self.jac_band(x)
        offsets = list(range(KU, -KL - 1, -1))
        core = sp.dia_matrix((band, offsets), shape=(m, m)).tocoo()
        fp = rhs_dp(x[:-1], x[-1], self.params)
        rows = np.concatenate([core.row, np.arange(m),
                               np.full(m + 1, m)])
        cols = np.concatenate([core.col, np.full(m, m),
                               np.arange(m + 1)])
        vals = np.concatenate([core.data, fp, self.w_state * v[:-1], [v[-1]]])
        return sp.coo_matrix((vals, (rows, cols)), shape=(m + 1, m + 1)).tocsc()

    # --- measures ---------------------------------------------------------

    def measures(self, x) -> dict:
        B = x[:-1][0::3]
        wn = self.w_state[0::3]
        return {
            "mean_B": float(wn @ B),
            "max_B": float(B.max()),
            "l2_B": float(math.sqrt(wn @ (B * B))),
        }

    def n_unstable(self, x, opts: ContinuationOptions) -> int:
        ev = rightmost_eigenvalues(self.jac_band(x), count=opts.eig_count)
        return int(np.sum(ev.real > opts.unstable_tol))

    def smallest_eig_magnitude(self, x) -> float:
        ev = rightmost_eigenvalues(self.jac_band(x), count=12)
        return float(np.min(np.abs(ev)))


def corrector(problem: Problem, x_pred: np.ndarray, v: np.ndarray,
              max_iter: int = CORRECTOR_MAX_ITER, loose_dx: float = 1e-6):
    """Newton on (F(x), (x - x_pred) . v) = 0.

    Terminates when both the residual and the last correction are below
    their tolerances.  Near-singular points may stall in the correction
    norm while the residual is already converged; those are accepted with
    the looser ``loose_dx`` bound.  Returns (x, iterations) or (None, its).
    """
    x = x_pred.copy()
    last_dx = math.inf
    for it in range(1, max_iter + 1):
        f = problem.F(x)
        g = problem.dot(x - x_pred, v)
        res = np.concatenate([f, [g]])
        A = problem.augmented_jacobian(x, v)
        try:
            dx = sp.linalg.spsolve(A, -res)
        except RuntimeError:
            return None, it
        if not np.all(np.isfinite(dx)):
            return None, it
        x = x + dx
        last_dx = float(np.max(np.abs(dx)))
        if last_dx < CORRECTOR_TOL_DX:
            if float(np.max(np.abs(problem.F(x)))) < CORRECTOR_TOL_F:
                return x, it
    if float(np.max(np.abs(problem.F(x)))) < CORRECTOR_TOL_F and last_dx < loose_dx:
        return x, max_iter
    return None, max_iter


def tangent(problem: Problem, x: np.ndarray, v_prev: np.ndarray) -> np.ndarray:
    """Unit tangent at x: null vector of [dF/dU | dF/dp] oriented along v_prev.

    Solved through the bordered system with v_prev as the closing row, which
    stays regular at folds.  Normalized in the continuation metric.
    """
    A = problem.augmented_jacobian(x, v_prev)
    b = np.zeros(problem.m + 1)
    b[-1] = 1.0
    t = sp.linalg.spsolve(A, b)
    if not np.all(np.isfinite(t)):
        raise ConvergenceError("tangent solve produced non-finite values "
                               "(rank deficiency beyond a simple fold)")
    t /= problem.norm(t)
    if problem.dot(t, v_prev) < 0:
        t = -t
    return t


def _sign_det(problem: Problem, x, v) -> int:
    return sparse_sign_det(problem.augmented_jacobian(x, v))


def _make_branch_point(problem: Problem, x, v, opts) -> BranchPoint:
    t_euclid = v / np.linalg.norm(v)
    return BranchPoint(
        state=FieldState.from_flat(problem.grid, x[:-1]),
        p=float(x[-1]),
        tangent=t_euclid,
        measures=problem.measures(x),
        n_unstable=problem.n_unstable(x, opts),
        tau_fold=float(v[-1]),
        tau_branch=_sign_det(problem, x, v),
    )


@dataclass
class _RawEvent:
    which: str          # "fold" | "branch"
    index: int          # left bracket point index into the walk
    h_used: float
    both_crossed: bool = False


def continue_branch(problem: Problem, seed_x: np.ndarray,
                    direction: int = -1,
                    opts: ContinuationOptions | None = None,
                    first_tangent: np.ndarray | None = None,
                    provenance: str = "",
                    depth: int = 0,
                    branch_point_kind: str = "branch_point") -> Branch:
    """Trace one solution curve from a converged seed.

    ``direction`` orients the first tangent toward decreasing (-1) or
    increasing (+1) p; when the seed tangent has no p-component (fresh
    branch switch) ``first_tangent`` supplies the outward orientation.
    Events are refined by bisection before the branch is returned.
    """
    opts = opts or ContinuationOptions()
    if float(np.max(np.abs(problem.F(seed_x)))) >= CORRECTOR_TOL_F:
        raise InvalidArgumentError("continuation seed is not converged")

    border = first_tangent
    if border is None:
        border = np.zeros(problem.m + 1)
        border[-1] = 1.0
    v = tangent(problem, seed_x, border)
    if first_tangent is None:
        if v[-1] != 0.0 and math.copysign(1.0, v[-1]) != direction:
            v = -v
    elif problem.dot(v, first_tangent) < 0:
        v = -v

    pts_x = [seed_x.copy()]
    pts_v = [v.copy()]
    branch = Branch(points=[_make_branch_point(problem, seed_x, v, opts)],
                    provenance=provenance, depth=depth)
    raw_events: list[_RawEvent] = []

    hstep = opts.h0
    tau_f_prev = v[-1]
    tau_b_prev = branch.points[0].tau_branch
    fails_at_min = 0
    termination = "max_steps"

    for _ in range(opts.max_steps):
        x_prev, v_prev = pts_x[-1], pts_v[-1]
        h_try = hstep
        if v_prev[-1] != 0.0:
            # land on the parameter bound instead of overshooting it
            bound = opts.p_max if v_prev[-1] > 0 else opts.p_min
            h_to_bound = (bound - x_prev[-1]) / v_prev[-1]
            if 0.0 < h_to_bound < h_try:
                h_try = max(h_to_bound, opts.h_min)
        got, its = corrector(problem, x_prev + h_try * v_prev, v_prev)
        if got is None:
            if hstep <= opts.h_min:
                fails_at_min += 1
                if fails_at_min >= 3:
                    termination = "corrector_failure"
                    break
            hstep = max(hstep / 2.0, opts.h_min)
            continue
        fails_at_min = 0
        x_new = got
        v_new = tangent(problem, x_new, v_prev)
        bp = _make_branch_point(problem, x_new, v_new, opts)
        tau_f, tau_b = bp.tau_fold, bp.tau_branch

        fold_crossed = (math.copysign(1.0, tau_f) != math.copysign(1.0, tau_f_prev))
        branch_crossed = (tau_b_prev != 0 and tau_b != 0 and tau_b != tau_b_prev)
        if branch_crossed:
            raw_events.append(_RawEvent("branch", len(pts_x) - 1, h_try,
                                        both_crossed=fold_crossed))
        elif fold_crossed:
            raw_events.append(_RawEvent("fold", len(pts_x) - 1, h_try))

        pts_x.append(x_new)
        pts_v.append(v_new)
        branch.points.append(bp)
        tau_f_prev, tau_b_prev = tau_f, tau_b

        if its <= opts.fast_iterations:
            hstep = min(hstep * opts.grow_factor, opts.h_max)
        at_bound = (x_new[-1] <= opts.p_min + 1e-9 or x_new[-1] >= opts.p_max - 1e-9)
        if at_bound and len(pts_x) > 2:
            termination = "p_bound"
            break
        if (len(pts_x) > opts.closed_loop_after
                and problem.norm(x_new - seed_x) < hstep):
            termination = "closed_loop"
            break
    branch.termination = termination

    for raw in raw_events:
        ev = _refine_event(problem, pts_x[raw.index], pts_v[raw.index],
                           raw, opts, branch_point_kind)
        if ev is not None:
            ev.branch_label = provenance
            branch.events.append(ev)
    branch.events.sort(key=lambda e: -e.p_refined)
    return branch


def _refine_event(problem: Problem, x_left, v_left, raw: _RawEvent,
                  opts: ContinuationOptions,
                  branch_point_kind: str) -> BifurcationEvent | None:
    """Bisection on arclength with corrector re-solves inside the bracket.

    When the fold and branch tests cross in the same bracket the step is
    halved and re-walked up to three times; a persistent double crossing is
    classified as a branch point (a pitchfork seen along its own branch
    carries a coincident fold of the conjugate pair).
    """
    which, h_used = raw.which, raw.h_used
    if raw.both_crossed:
        for _ in range(3):
            sub = _rewalk_bracket(problem, x_left, v_left, h_used)
            if sub is None:
                break
            x_left, v_left, h_used, single = sub
            if single is not None:
                which = single
                break
        else:
            which = "branch"

    p_lo = float(x_left[-1])
    tau_left = v_left[-1] if which == "fold" else _sign_det(problem, x_left, v_left)
    x_mid, v_mid = x_left, v_left
    hcur = h_used
    for _ in range(60):
        got, _ = corrector(problem, x_left + (hcur / 2.0) * v_left, v_left,
                           max_iter=20)
        if got is None:
            hcur *= 0.37  # nudge the bisection point off the singularity
            if hcur < 1e-13:
                break
            continue
        x_mid = got
        v_mid = tangent(problem, x_mid, v_left)
        if which == "fold":
            tau_mid = v_mid[-1]
            if abs(tau_mid) < FOLD_TEST_TOL:
                break
            crossed = math.copysign(1.0, tau_mid) != math.copysign(1.0, tau_left)
        else:
            tau_mid = _sign_det(problem, x_mid, v_mid)
            crossed = (tau_mid != tau_left and tau_mid != 0)
        if hcur < 1e-12:
            break
        if crossed:
            hcur /= 2.0
        else:
            x_left, v_left, tau_left = x_mid, v_mid, tau_mid
            hcur /= 2.0

    if which == "fold":
        kind = "fold"
        test_value = abs(float(v_mid[-1]))
    else:
        kind = branch_point_kind
        test_value = problem.smallest_eig_magnitude(x_mid)
    return BifurcationEvent(
        kind=kind,
        p_refined=float(x_mid[-1]),
        state_refined=FieldState.from_flat(problem.grid, x_mid[:-1]),
        detection_interval=(p_lo, float(x_mid[-1])),
        test_value=test_value,
    )


def _rewalk_bracket(problem, x_left, v_left, h_used):
    """Walk a double-crossing bracket at half step; return the sub-bracket."""
    h = h_used / 2.0
    x, v = x_left, v_left
    tau_f = v[-1]
    tau_b = _sign_det(problem, x, v)
    for _ in range(2):
        got, _ = corrector(problem, x + h * v, v, max_iter=20)
        if got is None:
            return None
        v_new = tangent(problem, got, v)
        f_crossed = math.copysign(1.0, v_new[-1]) != math.copysign(1.0, tau_f)
        b_new = _sign_det(problem, got, v_new)
        b_crossed = (b_new != 0 and b_new != tau_b)
        if f_crossed and b_crossed:
            return x, v, h, None
        if b_crossed:
            return x, v, h, "branch"
        if f_crossed:
            return x, v, h, "fold"
        x, v = got, v_new
    return None


def switch_branch(problem: Problem, event: BifurcationEvent,
                  opts: ContinuationOptions | None = None,
                  eps_rel: float = 1e-3):
    """Seeds on the two half-branches shed at a branch point.

    Perturbs the critical state along +/- the null direction of dF/dU and
    corrector-converges on the hyperplane orthogonal (in the metric) to that
    direction; the seed therefore sits a controlled distance off the primary
    branch.  Raises ConvergenceError when both sides fail.
    """
    opts = opts or ContinuationOptions()
    if event.kind not in ("branch_point", "turing_onset"):
        raise InvalidArgumentError(f"cannot switch at a {event.kind} event")
    x_star = np.concatenate([event.state_refined.as_flat(), [event.p_refined]])
    phi = null_direction(problem.jac_band(x_star))
    seeds = []
    eps0 = eps_rel * float(np.linalg.norm(x_star))
    for sgn in (+1.0, -1.0):
        vdir = np.concatenate([sgn * phi, [0.0]])
        vdir /= problem.norm(vdir)
        seed = None
        for trial in range(6):
            eps = eps0 / (3.0 ** trial)
            got, _ = corrector(problem, x_star + eps * vdir, vdir, max_iter=20)
            if got is not None and np.linalg.norm(got - x_star) > 1e-10:
                seed = got
                break
        if seed is not None:
            seeds.append((seed, vdir))
    if not seeds:
        raise ConvergenceError(
            f"branch switching failed on both sides at p={event.p_refined:.6g}; "
            "consider adjusting the perturbation size"
        )
    return seeds


# --------------------------------------------------------------------------
# full diagram
# --------------------------------------------------------------------------

#: published critical values for the default parameter set (validation aid)
REFERENCE_EVENT_VALUES = {
    "LP1": 0.64, "TB1": 1.14, "TB2": 1.06, "PF1": 0.99, "PF2": 0.91,
    "LP2": 0.54, "LP3": 0.54, "LP4": 0.44, "LP5": 0.44,
}


@dataclass
class DiagramResult:
    branches: list[Branch]
    events: list[BifurcationEvent]
    params: ModelParams
    grid: GridSpec
    fold_p: float
    runtime_seconds: float = 0.0
    failures: list[str] = field(default_factory=list)

    def events_by_label(self) -> dict:
        return {e.label: e for e in self.events if e.label}

    def stable_states_at(self, p: float, p_slack: float = 0.02):
        """(branch label, point) for every stable state near parameter p.

        Every traversal of the window by every branch is inspected;
        branches flagged as duplicate tracings of another curve are
        skipped, reflection conjugates are kept (they are distinct
        states).  Two candidates count as the same state when their
        parameter, diagram measures and left/right orientation all agree
        (measures alone cannot separate conjugate pairs).
        """
        found = []
        for br in self.branches:
            if not br.points or br.duplicate_of is not None:
                continue
            for pt in br.passes_through(p, p_slack):
                if pt.n_unstable != 0:
                    continue
                if all(not _same_state(prev, pt) for _, prev in found):
                    found.append((br.label, pt))
        return found


def _sync_event_branches(branches: list[Branch]):
    for br in branches:
        for ev in br.events:
            ev.branch_label = br.label


def _same_state(a: BranchPoint, b: BranchPoint) -> bool:
    """Same steady state up to duplicate tracing.

    Scalar measures cannot separate conjugate or mirrored profiles, so the
    shape class (bell vs inverted bell vs skew side) enters the identity.
    """
    scale = 1.0 + abs(a.measures["max_B"])
    return (abs(a.p - b.p) < 2e-2
            and abs(a.measures["mean_B"] - b.measures["mean_B"]) < 1e-2 * scale
            and abs(a.measures["max_B"] - b.measures["max_B"]) < 1e-2 * scale
            and classify(a.state).profile_shape == classify(b.state).profile_shape)


def _seed_from_homogeneous(problem: Problem, tag: str, p: float) -> np.ndarray:
    for st in homogeneous_equilibria(p, problem.params):
        if st.branch_tag == tag:
            u = FieldState.uniform(problem.grid, st).as_flat()
            return np.concatenate([u, [p]])
    raise InvalidArgumentError(f"no {tag} equilibrium at p={p}")


def _shape_label(problem: Problem, branch: Branch) -> str:
    """Classify a freshly switched branch by its near-seed profile."""
    idx = min(3, len(branch.points) - 1)
    rep = classify(branch.points[idx].state)
    return rep.profile_shape


def _side_label(branch: Branch) -> str:
    """left/right by the biomass first moment near the seed."""
    idx = min(3, len(branch.points) - 1)
    return "left" if first_moment(branch.points[idx].state) < 0 else "right"


def _polyline_distance(problem: Problem, vec: np.ndarray, xs: np.ndarray) -> float:
    """Min metric distance from a point to the polyline through rows of xs."""
    w = np.concatenate([problem.w_state, [1.0]])
    if xs.shape[0] == 1:
        d = vec - xs[0]
        return math.sqrt(float((d * d) @ w))
    A = xs[:-1]
    D = xs[1:] - A
    rel = vec[None, :] - A
    den = np.einsum("ij,ij->i", D * w[None, :], D)
    den[den == 0.0] = 1e-300
    t = np.clip(np.einsum("ij,ij->i", rel * w[None, :], D) / den, 0.0, 1.0)
    P = A + t[:, None] * D
    diff = vec[None, :] - P
    d2 = np.einsum("ij,ij->i", diff * w[None, :], diff)
    return math.sqrt(float(np.min(d2)))


#: metric distance below which two traced curves count as the same curve
DUPLICATE_CURVE_TOL = 1e-2

#: metric distance below which an event already lies on a traced curve
COVERED_EVENT_TOL = 5e-3


def _event_covered(problem: Problem, event: BifurcationEvent,
                   branches: list[Branch]) -> bool:
    """True when a branch other than the owner passes through the event.

    Switching at such an event would re-trace curves that already exist
    (a pitchfork's crossing branch detects the same point).
    """
    x_ev = np.concatenate([event.state_refined.as_flat(), [event.p_refined]])
    for br in branches:
        if br.label == event.branch_label or br.provenance == event.branch_label:
            continue
        if len(br.points) < 2:
            continue
        xs = np.array([pt.x for pt in br.points])
        if _polyline_distance(problem, x_ev, xs) < COVERED_EVENT_TOL:
            return True
    return False


def _branch_duplicate_relation(problem: Problem, b1: Branch, b2: Branch):
    """"identity", "reflection" or None for two traced curves.

    Probes interior points of b1 against the full polyline of b2 (interior
    probes avoid the shared endpoints of pitchfork pairs).  Every probe
    must lie on b2 for a relation to hold; the identity/reflection call
    needs a clear margin at one probe at least, since near-symmetric
    curves make the two distances comparable.
    """
    if len(b1.points) < 4 or len(b2.points) < 2:
        return None
    xs2 = np.array([pt.x for pt in b2.points])
    n = len(b1.points)
    votes = {"identity": 0, "reflection": 0}
    for frac in (0.15, 0.3, 0.5, 0.7, 0.85):
        pt = b1.points[int(frac * (n - 1))]
        d_id = _polyline_distance(problem, pt.x, xs2)
        refl = np.concatenate([reflect(pt.state).as_flat(), [pt.p]])
        d_re = _polyline_distance(problem, refl, xs2)
        if min(d_id, d_re) >= DUPLICATE_CURVE_TOL:
            return None
        if d_id < 0.2 * d_re:
            votes["identity"] += 1
        elif d_re < 0.2 * d_id:
            votes["reflection"] += 1
    if votes["reflection"] > votes["identity"]:
        return "reflection"
    return "identity"


def _merge_events(all_events: list[BifurcationEvent]) -> list[BifurcationEvent]:
    """Drop duplicate detections of the same physical event, keep labels.

    Two events merge when both the parameter value and the refined state
    coincide; a pitchfork seen from its own half-branches re-detects the
    labeled event found on the crossing branch.
    """
    merged: list[BifurcationEvent] = []
    for ev in sorted(all_events, key=lambda e: (e.label == "", -e.p_refined)):
        dup = None
        for kept in merged:
            if abs(kept.p_refined - ev.p_refined) > EVENT_P_TOL:
                continue
            d1 = np.max(np.abs(kept.state_refined.as_flat()
                               - ev.state_refined.as_flat()))
            scale = max(float(np.max(np.abs(kept.state_refined.as_flat()))), 1e-30)
            if d1 < EVENT_STATE_TOL * scale:
                dup = kept
                break
        if dup is None:
            merged.append(ev)
        elif not dup.label and ev.label:
            dup.label = ev.label
    merged.sort(key=lambda e: -e.p_refined)
    return merged


def full_diagram(params: ModelParams, opts: ContinuationOptions | None = None,
                 N: int = 40) -> DiagramResult:
    """The complete steady-state diagram over p in [p_min, p_max].

    Orchestration: analytic equilibria seed the bare-soil and vegetated
    homogeneous branches; pattern-onset events on the vegetated branch are
    switched (depth 1), and branch points on those are switched once more
    (depth 2).  Conjugate / duplicate curves are flagged, not dropped, and
    events are merged and labeled LP1..LP5, TB1, TB2, PF1, PF2 following
    the published naming for this parameter regime.
    """
    t0 = time.time()
    opts = opts or ContinuationOptions()
    grid = GridSpec(L=params.L, N=N)
    problem = Problem(params, grid)
    failures: list[str] = []
    branches: list[Branch] = []

    pc0 = fold_precipitation(params, opts.p_max)

    bare = continue_branch(problem, _seed_from_homogeneous(problem, "bare_soil", opts.p_max),
                           direction=-1, opts=opts, provenance="bare", depth=0)
    bare.label = "bare"
    branches.append(bare)

    hom = continue_branch(problem, _seed_from_homogeneous(problem, "upper", opts.p_max),
                          direction=-1, opts=opts, provenance="homogeneous",
                          depth=0, branch_point_kind="turing_onset")
    hom.label = "homogeneous"
    branches.append(hom)

    folds = [e for e in hom.events if e.kind == "fold"]
    onsets = sorted((e for e in hom.events if e.kind == "turing_onset"),
                    key=lambda e: -e.p_refined)
    if folds:
        folds[0].label = "LP1"
    for i, ev in enumerate(onsets):
        ev.label = f"TB{i + 1}"
    _sync_event_branches(branches)

    # depth 1: branches shed at the pattern onsets
    depth1: list[Branch] = []
    for ev in onsets[: 2]:
        if _event_covered(problem, ev, branches + depth1):
            continue
        try:
            seeds = switch_branch(problem, ev, opts)
        except ConvergenceError as exc:
            failures.append(str(exc))
            continue
        for seed, vdir in seeds:
            out = seed - np.concatenate([ev.state_refined.as_flat(), [ev.p_refined]])
            out /= problem.norm(out)
            br = continue_branch(problem, seed, opts=opts, first_tangent=out,
                                 provenance=f"from-{ev.label}", depth=1)
            if ev.label == "TB2":
                br.label = f"asymmetric_{_side_label(br)}"
            else:
                br.label = _shape_label(problem, br)
            depth1.append(br)
    branches.extend(depth1)

    for br in depth1:
        if br.label in ("bell", "inverted_bell"):
            bps = [e for e in br.events if e.kind == "branch_point"]
            if bps:
                bps[0].label = "PF1" if br.label == "bell" else "PF2"
            flds = [e for e in br.events if e.kind == "fold"]
            if flds:
                flds[0].label = "LP2" if br.label == "bell" else "LP3"
    _sync_event_branches(branches)

    # depth 2: switch at the pitchforks of the symmetric pattern branches
    depth2: list[Branch] = []
    if opts.max_switch_depth >= 2:
        for br in depth1:
            for ev in br.events:
                if ev.label not in ("PF1", "PF2"):
                    continue
                if _event_covered(problem, ev, branches + depth2):
                    continue
                try:
                    seeds = switch_branch(problem, ev, opts)
                except ConvergenceError as exc:
                    failures.append(str(exc))
                    continue
                for seed, vdir in seeds:
                    out = seed - np.concatenate(
                        [ev.state_refined.as_flat(), [ev.p_refined]])
                    out /= problem.norm(out)
                    b2 = continue_branch(problem, seed, opts=opts,
                                         first_tangent=out,
                                         provenance=f"from-{ev.label}", depth=2)
                    side = _side_label(b2)
                    b2.label = (f"skewed_{side}" if ev.label == "PF1"
                                else f"asymmetric_{side}")
                    depth2.append(b2)
    branches.extend(depth2)

    for br in depth2:
        if br.provenance == "from-PF1":
            flds = [e for e in br.events if e.kind == "fold"]
            if flds:
                flds[0].label = "LP4" if br.label == "skewed_left" else "LP5"

    # unique labels before any cross-references are recorded
    seen: dict[str, int] = {}
    for br in branches:
        base = br.label or "branch"
        if base in seen:
            seen[base] += 1
            br.label = f"{base}_{seen[base]}"
        else:
            seen[base] = 0
    _sync_event_branches(branches)

    # flag duplicate and conjugate curves (collapsed in plots, kept for queries)
    for i, b1 in enumerate(branches):
        if b1.duplicate_of is not None:
            continue
        for b2 in branches[i + 1:]:
            if b2.duplicate_of is not None or b2.conjugate_of is not None:
                continue
            rel = _branch_duplicate_relation(problem, b1, b2)
            if rel == "identity":
                b2.duplicate_of = b1.label
            elif rel == "reflection":
                b2.conjugate_of = b1.label

    events = _merge_events([e for br in branches for e in br.events])
    return DiagramResult(branches=branches, events=events, params=params,
                         grid=grid, fold_p=pc0,
                         runtime_seconds=time.time() - t0, failures=failures)
