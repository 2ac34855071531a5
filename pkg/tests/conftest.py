import numpy as np
import pytest

from starshape import (
    EllipticalGauge,
    ExponentialProfile,
    GaussianProfile,
    HeavyTailProfile,
    KotzProfile,
    L1NormGauge,
    PolytopeGauge,
    SupNormGauge,
)
from starshape import rng as srng


def stream(seed, sid=0):
    return srng.stream(seed, sid)


def random_unit(gen, n, p):
    U = gen.normal(size=(n, p))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


@pytest.fixture(scope="session")
def analytic_gauges():
    """The closed-form planar gauges, keyed by a short label."""
    return {
        "ell-i2": EllipticalGauge(np.eye(2)),
        "ell-14": EllipticalGauge(np.diag([1.0, 4.0])),
        "sup": SupNormGauge(2),
        "l1": L1NormGauge(2),
        "poly": PolytopeGauge(
            [[1.0, 0.2], [-0.8, 0.6], [0.1, -1.1], [-0.4, -0.7], [0.9, 0.9]]
        ),
    }


@pytest.fixture(scope="session")
def profiles():
    return {
        "gaussian": GaussianProfile(1.0),
        "exponential": ExponentialProfile(1.0),
        "kotz": KotzProfile(1.0, 0.5, 2.0),
        "heavytail": HeavyTailProfile(3.0),
    }
