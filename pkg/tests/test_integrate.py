"""Stiff integrator behavior: fixed points, pattern selection, settling,
convergence order and tolerance response."""

import numpy as np
import pytest

import vegpatterns as vp
from vegpatterns.errors import ConvergenceError
from vegpatterns.grid import FieldState, GridSpec
from vegpatterns.integrate import _advance_fixed
from vegpatterns.linalg import rightmost_eigenvalues
from vegpatterns.model import homogeneous_equilibria
from vegpatterns.presets import initial_condition
from vegpatterns.semidiscrete import jacobian_band, rhs_flat


def upper_state(p, params):
    return [s for s in homogeneous_equilibria(p, params)
            if s.branch_tag == "upper"][0]


class TestIntegrate:
    def test_bare_soil_fixed_point(self, params, grid40):
        U0 = initial_condition("bare", 1.0, grid40, params)
        traj = vp.integrate(U0, 1.0, vp.IntegratorOptions(t_end=500.0), params)
        assert np.max(np.abs(traj.final.as_flat() - U0.as_flat())) < 1e-6

    def test_times_strictly_increasing(self, params, grid40):
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        traj = vp.integrate(U0, 1.1, vp.IntegratorOptions(t_end=200.0), params)
        assert np.all(np.diff(traj.times) > 0)
        assert all(s.is_finite() for s in traj.states)

    def test_bump_up_selects_bell(self, params, grid40):
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        final = vp.settle(U0, 1.1, None, params)
        rep = vp.classify(final)
        assert rep.profile_shape == "bell"
        assert rep.defect < 1e-6

    def test_bump_down_selects_inverted_bell(self, params, grid40):
        U0 = initial_condition("bump-down", 1.1, grid40, params)
        rep = vp.classify(vp.settle(U0, 1.1, None, params))
        assert rep.profile_shape == "inverted_bell"
        assert rep.defect < 1e-6

    def test_bell_perturbed_left_skews_left(self, params, grid40):
        U0 = initial_condition("bell-perturb-left", 0.95, grid40, params)
        rep = vp.classify(vp.settle(U0, 0.95, None, params))
        assert rep.profile_shape == "skewed_left"

    def test_convergence_order_frozen_jacobian(self, params, grid40):
        # linear problem du/dt = J0 (u - u0) + f0 with J0, f0 frozen at a
        # transient state; exact solution via the dense matrix exponential
        import scipy.linalg as sla
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        u0 = U0.as_flat()
        f0 = rhs_flat(u0, 1.1, params, grid40)
        band0 = jacobian_band(u0, 1.1, params, grid40)
        from vegpatterns.semidiscrete import band_to_dense
        J0 = band_to_dense(band0)

        def f(u):
            return f0 + J0 @ (u - u0)

        def jb(u):
            return band0

        t_end = 5.0
        exact = u0 + sla.expm(J0 * t_end) @ np.zeros_like(u0) \
            + sla.solve(J0, (sla.expm(J0 * t_end) - np.eye(len(u0))) @ f0)
        errs = []
        for n_steps in (10, 20, 40):
            u_num = _advance_fixed(f, jb, u0, t_end / n_steps, n_steps)
            errs.append(np.max(np.abs(u_num - exact)))
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
        for order in orders:
            assert 1.7 <= order <= 2.3

    def test_tolerance_tightening_not_worse(self, params, grid40):
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        res = {}
        for rtol in (1e-6, 1e-7):
            opts = vp.IntegratorOptions(rel_tol=rtol, abs_tol=rtol, t_end=50.0,
                                        steady_state_threshold=0.0)
            traj = vp.integrate(U0, 1.1, opts, params)
            res[rtol] = np.max(np.abs(rhs_flat(traj.final.as_flat(), 1.1,
                                               params, grid40)))
        assert res[1e-7] <= res[1e-6] * 1.1

    def test_step_failure_reports_partial_trajectory(self, params, grid40):
        # unreachable accuracy forces the step size to the underflow floor
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        opts = vp.IntegratorOptions(rel_tol=1e-16, abs_tol=1e-300, t_end=10.0)
        traj = vp.integrate(U0, 1.1, opts, params)
        assert traj.termination in ("step_failure", "t_end")
        if traj.termination == "step_failure":
            assert traj.times[-1] < 10.0


class TestSettle:
    def test_residual_bound_and_stability(self, params, grid40):
        U0 = initial_condition("bump-up", 1.1, grid40, params)
        final = vp.settle(U0, 1.1, None, params)
        res = np.max(np.abs(rhs_flat(final.as_flat(), 1.1, params, grid40)))
        assert res < 1e-10
        band = jacobian_band(final.as_flat(), 1.1, params, grid40)
        ev = rightmost_eigenvalues(band, 12)
        assert np.max(ev.real) < 1e-6

    def test_inverted_bell_persists(self, params, grid40, inverted_bell_state):
        final = vp.settle(inverted_bell_state, 0.95, None, params)
        assert vp.classify(final).profile_shape == "inverted_bell"

    def test_low_precipitation_collapses_to_bare(self, params, grid40):
        U0 = initial_condition("homogeneous", 0.8, grid40, params)
        final = vp.settle(U0, 0.3, None, params)
        assert np.max(final.B) < 1e-8
        assert final.W[0] == pytest.approx(0.3 / params.l, rel=1e-6)

    def test_noisy_homogeneous_returns_homogeneous(self, params, grid40):
        U0 = initial_condition("homogeneous", 1.5, grid40, params, noise=0.01,
                               seed=7)
        final = vp.settle(U0, 1.5, None, params)
        rep = vp.classify(final)
        assert rep.profile_shape == "flat"
        st = upper_state(1.5, params)
        assert np.max(np.abs(final.B - st.B)) < 1e-8

    def test_timeout_carries_last_state(self, params, grid40):
        # a horizon too short to reach steady state from a fresh transient
        U0 = initial_condition("bump-up", 1.05, grid40, params, noise=0.05,
                               seed=3)
        opts = vp.IntegratorOptions(t_end=1e-2, steady_state_threshold=1e-14)
        with pytest.raises(ConvergenceError) as err:
            vp.settle(U0, 1.05, opts, params)
        assert err.value.last_state is not None
        assert err.value.last_state.is_finite()
