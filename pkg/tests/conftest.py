import numpy as np
import pytest

import vegpatterns as vp


@pytest.fixture(scope="session")
def params():
    return vp.ModelParams()


@pytest.fixture(scope="session")
def grid40(params):
    return vp.GridSpec(L=params.L, N=40)


@pytest.fixture(scope="session")
def diagram(params):
    """Full bifurcation diagram at the production settings (N=40, L=8).

    Shared by the continuation property tests and several acceptance
    criteria; takes about a minute to compute.
    """
    return vp.full_diagram(params, vp.ContinuationOptions(), N=40)


@pytest.fixture(scope="session")
def bell_state(params, grid40):
    """Settled stable bell profile at p=1.1."""
    from vegpatterns.presets import initial_condition
    U0 = initial_condition("bump-up", 1.1, grid40, params)
    return vp.settle(U0, 1.1, None, params)


@pytest.fixture(scope="session")
def inverted_bell_state(params, grid40):
    from vegpatterns.presets import initial_condition
    U0 = initial_condition("bump-down", 1.1, grid40, params)
    return vp.settle(U0, 1.1, None, params)


def random_states(rng, n, scale=1.0):
    """Positive random (B, W, T) triples for property tests."""
    return scale * np.abs(rng.normal(loc=(0.5, 10.0, 0.2), scale=(0.5, 5.0, 0.2),
                                     size=(n, 3)))
