import numpy as np
import pytest

from phasemix import build_mixture
from phasemix.marriage import marriage_competing_model, marriage_model


@pytest.fixture(scope="session")
def marital():
    model, _ = marriage_model(heterogeneous=True)
    return model


@pytest.fixture(scope="session")
def marital_homogeneous():
    model, _ = marriage_model(heterogeneous=False)
    return model


@pytest.fixture(scope="session")
def marital_competing():
    model, _ = marriage_competing_model(heterogeneous=True)
    return model


@pytest.fixture(scope="session")
def two_state():
    """Feed-forward chain 1 -> 2 -> absorbed, scaled regime twice as fast.

    Everything about this model is computable by hand: the sub-generator
    is triangular with rates 1 and 1, the scaled copy has rates 2 and 2.
    """
    T = np.array([[-1.0, 1.0], [0.0, -1.0]])
    return build_mixture(T, speed=2.0, initial=[1.0, 0.0], scaled_weight=0.5)


@pytest.fixture(scope="session")
def scalar_half():
    """Single transient state, exit rate 1, scaled regime at half speed."""
    return build_mixture(np.array([[-1.0]]), speed=0.5,
                         initial=[1.0], scaled_weight=0.5)


def random_model(rng, m=3, p=1, defective=False):
    """Draw a structurally valid mixture model for property tests."""
    off = rng.uniform(0.1, 1.0, size=(m, m))
    np.fill_diagonal(off, 0.0)
    exits = rng.uniform(0.05, 0.5, size=(m, p))
    T = off.copy()
    np.fill_diagonal(T, -(off.sum(axis=1) + exits.sum(axis=1)))
    pi = rng.uniform(0.1, 1.0, size=m)
    pi /= pi.sum() / (0.8 if defective else 1.0)
    speed = rng.uniform(0.1, 3.0, size=m)
    w = rng.uniform(0.0, 1.0, size=m)
    return build_mixture(T, exits, speed=speed, initial=pi, scaled_weight=w)
