import numpy as np
import pytest

from spherclt.geometry import UnitVector, normalize


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def random_unit(rng, n):
    return normalize(rng.standard_normal(n))


def e1(n):
    return UnitVector.basis(n)
