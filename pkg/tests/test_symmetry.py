"""Reflection machinery: involution, equivariance, shape classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import vegpatterns as vp
from vegpatterns.grid import FieldState, GridSpec
from vegpatterns.semidiscrete import rhs_flat
from vegpatterns.symmetry import first_moment, near_onset_shape

GRID = GridSpec(L=8.0, N=24)

field_arrays = hnp.arrays(
    dtype=np.float64,
    shape=GRID.n_nodes,
    elements=st.floats(min_value=0.0, max_value=100.0, allow_nan=False),
)


@given(B=field_arrays, W=field_arrays, T=field_arrays)
@settings(max_examples=50, deadline=None)
def test_reflect_is_involution(B, W, T):
    U = FieldState(GRID, B, W, T)
    back = vp.reflect(vp.reflect(U))
    assert np.array_equal(back.B, U.B)
    assert np.array_equal(back.W, U.W)
    assert np.array_equal(back.T, U.T)


@given(B=field_arrays, W=field_arrays, T=field_arrays)
@settings(max_examples=50, deadline=None)
def test_defect_is_reflection_invariant(B, W, T):
    U = FieldState(GRID, B, W, T)
    assert vp.classify(vp.reflect(U)).defect == vp.classify(U).defect


def test_homogeneous_reflects_to_itself(params, grid40):
    from vegpatterns.model import homogeneous_equilibria
    st_ = homogeneous_equilibria(1.2, params)[1]
    U = FieldState.uniform(grid40, st_)
    assert np.array_equal(vp.reflect(U).as_flat(), U.as_flat())
    rep = vp.classify(U)
    assert rep.profile_shape == "flat"
    assert rep.classification == "symmetric"


def test_shape_mapping_under_reflection(params, grid40, bell_state):
    rep = vp.classify(bell_state)
    assert rep.profile_shape == "bell"
    assert vp.classify(vp.reflect(bell_state)).profile_shape == "bell"


def test_skewed_pair_are_mutual_reflections(params, grid40):
    from vegpatterns.presets import initial_condition
    left = vp.settle(initial_condition("bell-perturb-left", 0.95, grid40, params),
                     0.95, None, params)
    rep_l = vp.classify(left)
    assert rep_l.profile_shape == "skewed_left"
    assert rep_l.defect > 0.1
    mirrored = vp.reflect(left)
    # equivariance makes the mirror image a steady state of the same problem
    res = np.max(np.abs(rhs_flat(mirrored.as_flat(), 0.95, params, grid40)))
    assert res < 1e-8
    assert vp.classify(mirrored).profile_shape == "skewed_right"
    right = vp.settle(initial_condition("bell-perturb-right", 0.95, grid40, params),
                      0.95, None, params)
    assert vp.classify(right).profile_shape == "skewed_right"
    assert np.max(np.abs(right.as_flat() - mirrored.as_flat())) < 1e-6


def test_bell_and_inverted_bell_classification(bell_state, inverted_bell_state):
    rep = vp.classify(bell_state)
    assert rep.profile_shape == "bell" and rep.defect < 1e-6
    rep = vp.classify(inverted_bell_state)
    assert rep.profile_shape == "inverted_bell" and rep.defect < 1e-6


def test_first_moment_signs(grid40):
    x = grid40.x
    left_heavy = FieldState(grid40, np.exp(-(x - 2.0) ** 2),
                            np.ones_like(x), np.zeros_like(x))
    assert first_moment(left_heavy) < 0
    assert vp.classify(left_heavy).profile_shape == "skewed_left"
    right_heavy = vp.reflect(left_heavy)
    assert first_moment(right_heavy) > 0
    assert vp.classify(right_heavy).profile_shape == "skewed_right"


def test_near_onset_shape_parity():
    assert near_onset_shape(2) == "symmetric"
    assert near_onset_shape(1) == "half_period"
    assert near_onset_shape(4) == "symmetric"
    assert near_onset_shape(7) == "half_period"
    with pytest.raises(ValueError):
        near_onset_shape(0)
