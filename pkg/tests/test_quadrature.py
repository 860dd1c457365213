import math

import pytest

from spherclt.errors import ConvergenceError, InvalidInputError
from spherclt.quadrature import quadrature


def test_linear():
    assert quadrature(lambda x: x, 0, 1).value == pytest.approx(0.5, abs=1e-12)


def test_infinite_range():
    assert quadrature(lambda x: math.exp(-x), 0, math.inf, 1e-10).value == pytest.approx(1.0, abs=1e-10)


def test_endpoint_singularity():
    assert quadrature(lambda u: u**-0.5, 0, 1, 1e-8).value == pytest.approx(2.0, abs=1e-8)


def test_empty_interval():
    r = quadrature(math.sin, 1.0, 1.0)
    assert r.value == 0.0 and r.evaluations == 0


def test_budget_exhausted_carries_estimate():
    with pytest.raises(ConvergenceError) as info:
        quadrature(lambda x: math.sin(1 / x) / x, 1e-6, 1, 1e-14, limit=5)
    assert info.value.estimate is not None
    assert info.value.error_estimate > 1e-14


def test_bad_arguments():
    with pytest.raises(InvalidInputError):
        quadrature(math.sin, 1, 0)
    with pytest.raises(InvalidInputError):
        quadrature(math.sin, 0, 1, tol=0)
