"""Mode matrices, the Routh-Hurwitz test, onset loci and the size effect."""

import numpy as np
import pytest

import vegpatterns as vp
from vegpatterns.errors import InvalidArgumentError
from vegpatterns.model import fold_precipitation, homogeneous_equilibria
from vegpatterns.stability import (CharCoeffs, char_coeffs, cubic_eigenvalues,
                                   mode_matrix, onset_objective, routh_hurwitz,
                                   turing_roots, wavenumber_sq)


def upper_state(p, params):
    return [s for s in homogeneous_equilibria(p, params)
            if s.branch_tag == "upper"][0]


def bare_state(p, params):
    return [s for s in homogeneous_equilibria(p, params)
            if s.branch_tag == "bare_soil"][0]


class TestModeMatrix:
    def test_bare_soil_lower_triangular(self, params):
        p, n = 0.9, 3
        mm = mode_matrix(bare_state(p, params), p, n, params)
        A = mm.A
        assert A[0, 1] == A[0, 2] == A[1, 0] == A[1, 2] == A[2, 1] == 0.0
        k2 = wavenumber_sq(n, params.L)
        expected = sorted([-params.d - params.D_B * k2,
                           -params.l - params.D_W * k2,
                           -(params.k + params.w * p)])
        got = sorted(np.linalg.eigvals(A).real)
        np.testing.assert_allclose(got, expected, rtol=1e-13)

    def test_mode_zero_equals_reaction_jacobian(self, params):
        st = upper_state(1.3, params)
        mm = mode_matrix(st, 1.3, 0, params)
        J = vp.reaction_jacobian(st.as_tuple(), 1.3, params)
        np.testing.assert_allclose(mm.A, J, rtol=1e-9, atol=1e-18)

    def test_no_diffusion_in_third_row(self, params):
        st = upper_state(1.3, params)
        a33_0 = mode_matrix(st, 1.3, 0, params).A[2, 2]
        a33_5 = mode_matrix(st, 1.3, 5, params).A[2, 2]
        assert a33_0 == a33_5

    def test_onset_objective_vanishes_at_root(self, params):
        p_c = vp.turing_locus(2, 8.0, params)
        assert p_c == pytest.approx(1.14, abs=0.005)
        k2 = wavenumber_sq(2, 8.0)
        assert abs(onset_objective(p_c, k2, params)) < 1e-10
        st = upper_state(p_c, params)
        mm = mode_matrix(st, p_c, 2, params)
        assert abs(np.linalg.det(mm.A)) < 1e-10

    def test_rejects_non_equilibrium(self, params):
        st = vp.HomogeneousState(B=0.4, W=9.0, T=0.05, branch_tag="upper")
        with pytest.raises(InvalidArgumentError):
            mode_matrix(st, 1.3, 1, params)


class TestRouthHurwitz:
    def test_triple_root_stable(self):
        assert routh_hurwitz(CharCoeffs(3.0, 3.0, 1.0)) is True

    def test_product_condition_fails(self):
        assert routh_hurwitz(CharCoeffs(1.0, 1.0, 2.0)) is False

    def test_bare_soil_mode_coefficients(self, params):
        mm = mode_matrix(bare_state(1.0, params), 1.0, 1, params)
        cc = char_coeffs(mm.A)
        assert routh_hurwitz(cc) is True
        roots = cubic_eigenvalues(cc)
        assert max(z.real if isinstance(z, complex) else z for z in roots) < 0

    def test_char_coeffs_match_direct_expansion(self, params):
        rng = np.random.default_rng(7)
        for _ in range(200):
            A = rng.normal(size=(3, 3))
            cc = char_coeffs(A)
            poly = np.poly(A)  # leading-coefficient-1 characteristic polynomial
            assert cc.c2 == pytest.approx(poly[1], rel=1e-12, abs=1e-12)
            assert cc.c1 == pytest.approx(poly[2], rel=1e-12, abs=1e-12)
            assert cc.c0 == pytest.approx(poly[3], rel=1e-12, abs=1e-12)

    def test_cubic_solver_vs_companion(self):
        def canonical(roots):
            return sorted((complex(z) for z in roots),
                          key=lambda z: (round(z.real, 7), round(z.imag, 7)))

        rng = np.random.default_rng(11)
        for _ in range(1000):
            cc = CharCoeffs(*rng.normal(scale=2.0, size=3))
            mine = canonical(cubic_eigenvalues(cc))
            ref = canonical(np.roots([1.0, cc.c2, cc.c1, cc.c0]))
            np.testing.assert_allclose(mine, ref, rtol=1e-7, atol=1e-9)

    def test_verdict_matches_eigenvalues_on_mode_matrices(self, params):
        rng = np.random.default_rng(13)
        checked = 0
        while checked < 1000:
            p = float(rng.uniform(0.0, 2.0))
            n = int(rng.integers(0, 65))
            states = homogeneous_equilibria(p, params)
            st = states[int(rng.integers(0, len(states)))]
            mm = mode_matrix(st, p, n, params)
            cc = char_coeffs(mm.A)
            lead = max(z.real if isinstance(z, complex) else z
                       for z in cubic_eigenvalues(cc))
            if abs(lead) < 1e-9:
                continue  # marginal; verdict not determined at this tolerance
            assert routh_hurwitz(cc) == (lead < 0)
            checked += 1


class TestHomogeneousStability:
    def test_bare_soil_always_stable(self, params):
        for p in np.linspace(0.0, 2.0, 21):
            rep = vp.homogeneous_stability(bare_state(float(p), params),
                                           float(p), params)
            assert rep.stable

    def test_upper_branch_stable_above_onset(self, params):
        rep = vp.homogeneous_stability(upper_state(1.5, params), 1.5, params)
        assert rep.stable

    def test_upper_branch_first_violating_mode(self, params):
        rep = vp.homogeneous_stability(upper_state(1.10, params), 1.10, params)
        assert not rep.stable
        assert rep.first_violating_mode == 2

    def test_verdict_iff_all_modes_pass(self, params):
        rep = vp.homogeneous_stability(upper_state(1.10, params), 1.10, params)
        assert rep.stable == all(m.routh_hurwitz_pass for m in rep.modes)


class TestTuringLocus:
    def test_published_onsets_at_L8(self, params):
        assert vp.turing_locus(2, 8.0, params) == pytest.approx(1.14, abs=0.005)
        assert vp.turing_locus(1, 8.0, params) == pytest.approx(1.06, abs=0.005)

    def test_mode_ordering_at_L8(self, params):
        assert vp.turing_locus(2, 8.0, params) > vp.turing_locus(1, 8.0, params)

    def test_small_domain_has_no_onset(self, params):
        assert vp.turing_locus(1, 2.0, params) is None

    def test_roots_exceed_fold(self, params):
        pc0 = fold_precipitation(params)
        for L in (4.0, 6.0, 8.0):
            for n in (1, 2, 3):
                for root in turing_roots(n, L, params):
                    assert root.p_c > pc0

    def test_root_residual_bound(self, params):
        for n, L in ((1, 8.0), (2, 8.0), (1, 4.0)):
            for root in turing_roots(n, L, params):
                k2 = wavenumber_sq(n, L)
                assert abs(onset_objective(root.p_c, k2, params)) < 1e-10

    def test_scan_mode_counts(self, params):
        expect = {8.0: {1, 2}, 6.0: {1}, 4.0: {1}, 2.0: set()}
        for L, modes in expect.items():
            scan = vp.turing_scan(L, 6, params)
            assert {n for n, pc in scan if pc is not None} == modes


class TestCriticalDomainSize:
    def test_definition_consistency(self, params):
        lstar = vp.critical_domain_size(params)
        assert lstar is not None
        # just above: the n=1 mode exists; just below: it does not
        assert vp.turing_locus(1, lstar * 1.02, params) is not None
        assert vp.turing_locus(1, lstar * 0.98, params) is None

    def test_larger_biomass_diffusion_raises_threshold(self, params):
        lstar = vp.critical_domain_size(params)
        doubled = params.replace(D_B=2 * params.D_B)
        lstar2 = vp.critical_domain_size(doubled)
        assert lstar2 is not None and lstar2 > lstar
        # brute-force oracle: sign changes of the objective over a dense L grid
        from vegpatterns.stability import _mode_det, _upper_state
        pc0 = fold_precipitation(doubled)
        st = _upper_state(pc0, doubled)
        Ls = np.linspace(0.5, 20.0, 20000)
        vals = _mode_det(st.B, st.W, pc0, (np.pi / Ls) ** 2, doubled)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        assert len(idx) >= 1
        assert Ls[idx[0]] == pytest.approx(lstar2, abs=2e-3)
