"""Semidiscrete operators: stencil structure, Neumann closure, Jacobian
consistency and the discrete-versus-analytic dispersion relation."""

import numpy as np
import pytest

import vegpatterns as vp
from vegpatterns.errors import InvalidArgumentError
from vegpatterns.grid import FieldState, GridSpec
from vegpatterns.model import homogeneous_equilibria
from vegpatterns.semidiscrete import (band_to_dense, jacobian_band, rhs_flat,
                                      semidiscrete_jacobian, semidiscrete_rhs)
from vegpatterns.stability import mode_matrix


def upper_state(p, params):
    return [s for s in homogeneous_equilibria(p, params)
            if s.branch_tag == "upper"][0]


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return FieldState(
        grid,
        scale * np.abs(rng.normal(0.5, 0.3, grid.n_nodes)),
        scale * np.abs(rng.normal(10.0, 3.0, grid.n_nodes)),
        scale * np.abs(rng.normal(0.2, 0.1, grid.n_nodes)),
    )


class TestGridSpec:
    def test_minimum_intervals(self):
        with pytest.raises(InvalidArgumentError):
            GridSpec(L=8.0, N=7)

    def test_spacing_consistency(self):
        g = GridSpec(L=8.0, N=40)
        assert g.h * g.N == g.L
        assert len(g.x) == 41
        assert g.x[-1] == pytest.approx(8.0, abs=1e-14)

    def test_trapezoid_weights_sum(self):
        g = GridSpec(L=8.0, N=25)
        assert g.trapezoid_weights().sum() == pytest.approx(8.0, rel=1e-14)


class TestSemidiscreteRhs:
    def test_uniform_equilibrium_is_steady(self, params, grid40):
        for p in (0.8, 1.2, 1.9):
            for st in homogeneous_equilibria(p, params):
                U = FieldState.uniform(grid40, st)
                dU = semidiscrete_rhs(U, p, params)
                assert np.max(np.abs(dU.as_flat())) < 1e-12

    def test_reflection_equivariance_exact(self, params, grid40):
        for seed in range(5):
            U = random_field(grid40, seed)
            dU = semidiscrete_rhs(U, 1.1, params)
            refl = vp.reflect(U)
            d_refl = semidiscrete_rhs(refl, 1.1, params)
            assert np.array_equal(vp.reflect(dU).as_flat(), d_refl.as_flat())

    def test_mass_conserved_without_reaction(self, params):
        grid = GridSpec(L=8.0, N=200)
        U = random_field(grid, 3)
        dU = semidiscrete_rhs(U, 1.0, params, include_reaction=False)
        w = grid.trapezoid_weights()
        assert abs(w @ dU.B) < 1e-10
        assert abs(w @ dU.W) < 1e-10
        assert np.all(dU.T == 0.0)

    def test_nonfinite_rejected(self, params, grid40):
        U = random_field(grid40)
        U.B[3] = np.inf
        with pytest.raises(InvalidArgumentError):
            semidiscrete_rhs(U, 1.0, params)

    def test_mode_growth_rate_matches_dispersion(self, params):
        # perturb the uniform state along the critical cosine mode and read
        # the growth rate off a directional derivative; the mode matrix is
        # not symmetric, so the quotient uses the left eigenvector as well
        p, n = 1.10, 2
        st = upper_state(p, params)
        mm = mode_matrix(st, p, n, params)
        lam, right = np.linalg.eig(mm.A)
        lamL, left = np.linalg.eig(mm.A.T)
        x = np.real(right[:, int(np.argmax(lam.real))])
        y = np.real(left[:, int(np.argmax(lamL.real))])
        lead = float(np.max(lam.real))
        errors = []
        for N in (100, 200, 400):
            grid = GridSpec(L=params.L, N=N)
            mode = np.cos(n * np.pi * grid.x / grid.L)
            phi = np.empty(3 * grid.n_nodes)
            psi = np.empty(3 * grid.n_nodes)
            for comp in range(3):
                phi[comp::3] = x[comp] * mode
                psi[comp::3] = y[comp] * mode
            u0 = FieldState.uniform(grid, st).as_flat()
            eps = 1e-6
            du = (rhs_flat(u0 + eps * phi, p, params, grid)
                  - rhs_flat(u0, p, params, grid)) / eps
            lam_R = float(psi @ du / (psi @ phi))
            # the cosine is an exact eigenvector of the discrete Laplacian,
            # so the quotient must match the discrete-symbol prediction
            k2_d = (2.0 / grid.h**2) * (1.0 - np.cos(n * np.pi * grid.h / grid.L))
            A_d = mm.A.copy()
            A_d[0, 0] += params.D_B * (mm.k2 - k2_d)
            A_d[1, 1] += params.D_W * (mm.k2 - k2_d)
            lam_d = float(np.max(np.linalg.eigvals(A_d).real))
            assert lam_R == pytest.approx(lam_d, rel=1e-4)
            errors.append(abs(lam_R - lead))
        assert errors[1] / abs(lead) < 2e-3    # N=200
        assert errors[2] / abs(lead) < 1e-3    # N=400
        # discrete-to-continuum convergence at second order
        order1 = np.log2(errors[0] / errors[1])
        order2 = np.log2(errors[1] / errors[2])
        assert 1.8 <= order1 <= 2.2
        assert 1.8 <= order2 <= 2.2


class TestSemidiscreteJacobian:
    def test_diffusion_rows_sum_to_zero(self, params, grid40):
        bare = homogeneous_equilibria(1.0, params)[0]
        U = FieldState.uniform(grid40, bare)
        band = jacobian_band(U.as_flat(), 1.0, params, grid40)
        J = band_to_dense(band)
        m = J.shape[0]
        J_reaction = np.zeros_like(J)
        for i in range(grid40.n_nodes):
            Ju = vp.reaction_jacobian((U.B[i], U.W[i], U.T[i]), 1.0, params)
            J_reaction[3 * i:3 * i + 3, 3 * i:3 * i + 3] = Ju
        diffusion = J - J_reaction
        np.testing.assert_allclose(diffusion.sum(axis=1), np.zeros(m), atol=1e-9)

    def test_matches_finite_differences(self, params):
        grid = GridSpec(L=8.0, N=16)
        U = random_field(grid, 5)
        u = U.as_flat()
        J = band_to_dense(jacobian_band(u, 1.1, params, grid))
        m = len(u)
        Jfd = np.empty((m, m))
        for j in range(m):
            step = 1e-6 * (1.0 + abs(u[j]))
            up, um = u.copy(), u.copy()
            up[j] += step
            um[j] -= step
            Jfd[:, j] = (rhs_flat(up, 1.1, params, grid)
                         - rhs_flat(um, 1.1, params, grid)) / (2 * step)
        scale = np.max(np.abs(J))
        assert np.max(np.abs(J - Jfd)) / scale < 1e-5

    def test_sparse_structure(self, params, grid40):
        U = random_field(grid40, 1)
        S = semidiscrete_jacobian(U, 1.1, params)
        m = 3 * grid40.n_nodes
        assert S.shape == (m, m)
        np.testing.assert_allclose(
            S.toarray(),
            band_to_dense(jacobian_band(U.as_flat(), 1.1, params, grid40)),
            atol=0,
        )

    def test_leading_eigenvalues_match_dispersion_union(self, params):
        p = 1.2
        grid = GridSpec(L=8.0, N=200)
        st = upper_state(p, params)
        u0 = FieldState.uniform(grid, st).as_flat()
        J = band_to_dense(jacobian_band(u0, p, params, grid))
        ev_d = np.sort(np.linalg.eigvals(J).real)[::-1][:4]
        ev_a = []
        for n in range(0, 12):
            ev_a.extend(np.linalg.eigvals(mode_matrix(st, p, n, params).A).real)
        ev_a = np.sort(np.array(ev_a))[::-1][:4]
        np.testing.assert_allclose(ev_d, ev_a, rtol=1e-3)

    def test_leading_eigenvalue_grid_convergence(self, params):
        p = 1.2
        st = upper_state(p, params)
        lam_analytic = max(
            float(np.max(np.linalg.eigvals(mode_matrix(st, p, n, params).A).real))
            for n in range(0, 24)
        )
        errors = []
        for N in (25, 50, 100, 200):
            grid = GridSpec(L=8.0, N=N)
            u0 = FieldState.uniform(grid, st).as_flat()
            J = band_to_dense(jacobian_band(u0, p, params, grid))
            lam_d = float(np.max(np.linalg.eigvals(J).real))
            errors.append(abs(lam_d - lam_analytic))
        orders = [np.log2(errors[i] / errors[i + 1]) for i in range(3)]
        for order in orders:
            assert 1.8 <= order <= 2.2


class TestSerialization:
    def test_csv_roundtrip_bitwise(self, params, grid40):
        U = random_field(grid40, 9)
        back = FieldState.from_csv(U.to_csv())
        assert np.array_equal(back.B, U.B)
        assert np.array_equal(back.W, U.W)
        assert np.array_equal(back.T, U.T)
        assert back.grid.N == grid40.N and back.grid.L == grid40.L

    def test_json_roundtrip_bitwise(self, grid40):
        U = random_field(grid40, 10)
        back = FieldState.from_json(U.to_json())
        assert np.array_equal(back.as_flat(), U.as_flat())

    def test_file_roundtrip(self, grid40, tmp_path):
        U = random_field(grid40, 11)
        U.to_csv(tmp_path / "state.csv")
        U.to_json(tmp_path / "state.json")
        assert np.array_equal(FieldState.from_csv(tmp_path / "state.csv").as_flat(),
                              U.as_flat())
        assert np.array_equal(FieldState.from_json(tmp_path / "state.json").as_flat(),
                              U.as_flat())

    def test_shape_mismatch_rejected(self, grid40):
        with pytest.raises(InvalidArgumentError):
            FieldState(grid40, np.zeros(5), np.zeros(5), np.zeros(5))
