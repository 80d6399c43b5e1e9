import numpy as np
import pytest

from restriction_lab.curves import SimpleCurve, monomial_oracle, poly_oracle


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def moment_curve_3():
    """phi = t^3/6: the nondegenerate reference case for d = 3."""
    return SimpleCurve(d=3, phi=poly_oracle([0, 0, 0, 1 / 6],
                                            domain=(0.0, 2.0)),
                       label="moment-3")


@pytest.fixture
def quartic_curve():
    """phi = t^4 on (0, 1): the flat-at-zero workhorse for d = 3."""
    return SimpleCurve(d=3, phi=monomial_oracle(4.0, domain=(0.0, 1.0)),
                       label="quartic")
