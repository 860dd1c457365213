import math

import numpy as np
import pytest
from scipy import stats as sps

from spherclt.errors import InvalidInputError
from spherclt.stats import (
    TestReport,
    covariance_test,
    empirical_covariance,
    entry_variances,
    ks_two_sample_test,
    mahalanobis_chi2_test,
    mean_z_test,
    variance_z_test,
)

SIGMA = np.array([[0.5, 0.1, 0.0], [0.1, 0.3, -0.05], [0.0, -0.05, 0.2]])


def gaussian(rng, cov, size):
    return rng.multivariate_normal(np.zeros(len(cov)), cov, size=size)


def test_report_convention_and_line():
    r = TestReport("x", 1.5, 2.0, False, 10)
    assert r.passed
    assert not TestReport("y", 2.5, 2.0, True, 10).passed
    assert TestReport("z", 2.0, 2.0, False, 1).passed
    assert r.line() == "PASS x: statistic=1.5 threshold=2 K=10"
    assert r.to_dict()["name"] == "x"


def test_empirical_covariance_examples(rng):
    v = np.array([1.0, -2.0, 0.5])
    assert np.allclose(np.asarray(empirical_covariance([v, -v], mean=np.zeros(3))), np.outer(v, v))
    assert np.array_equal(np.asarray(empirical_covariance(np.tile(v, (5, 1)))), np.zeros((3, 3)))
    x = rng.standard_normal((20000, 4))
    assert np.max(np.abs(np.asarray(empirical_covariance(x)) - np.eye(4))) < 4 / math.sqrt(20000)
    with pytest.raises(InvalidInputError):
        empirical_covariance([v])


def test_empirical_covariance_divisors(rng):
    x = rng.standard_normal((7, 2))
    assert np.allclose(np.asarray(empirical_covariance(x)), np.cov(x.T, ddof=1))
    assert np.allclose(np.asarray(empirical_covariance(x, mean=np.zeros(2))), x.T @ x / 7)


def test_entry_variances_gaussian_case(rng):
    x = gaussian(rng, SIGMA, 200000)
    d = np.diag(SIGMA)
    gauss = (np.outer(d, d) + SIGMA**2) / x.shape[0]
    assert np.allclose(entry_variances(x, np.zeros(3)), gauss, rtol=0.05)


def test_covariance_test_exact_and_mismatch():
    r = covariance_test(SIGMA, SIGMA, 1000)
    assert r.statistic == 0.0 and r.passed
    assert r.details["frobenius"] == 0.0
    bad = SIGMA.copy()
    bad[0, 0] *= 1.5
    assert not covariance_test(bad, SIGMA, 1000).passed
    with pytest.raises(InvalidInputError):
        covariance_test(np.eye(2), SIGMA, 10)


def test_covariance_test_iid_draws_pass(rng):
    passes = sum(
        covariance_test(empirical_covariance(x, mean=np.zeros(3)), SIGMA, 3000).passed
        for x in (gaussian(rng, SIGMA, 3000) for _ in range(50))
    )
    assert passes >= 49


def test_mahalanobis_null_and_power(rng):
    assert mahalanobis_chi2_test(gaussian(rng, SIGMA, 5000), SIGMA).passed
    inflated = mahalanobis_chi2_test(gaussian(rng, 2 * SIGMA, 5000), SIGMA)
    assert not inflated.passed
    assert inflated.details["mean_d2"] == pytest.approx(6.0, rel=0.05)


def test_mahalanobis_one_dimensional(rng):
    x = rng.standard_normal((1000, 1))
    r = mahalanobis_chi2_test(x, np.eye(1))
    assert r.statistic == pytest.approx(sps.kstest(x[:, 0] ** 2, sps.chi2(1).cdf).statistic, abs=1e-15)
    assert r.threshold == pytest.approx(1.628 / math.sqrt(1000))


def test_mahalanobis_singular(rng):
    sigma = np.diag([1.0, 0.0])
    x = np.c_[rng.standard_normal(200), np.zeros(200)]
    with pytest.raises(np.linalg.LinAlgError):
        mahalanobis_chi2_test(x, sigma, regularize=0)
    r = mahalanobis_chi2_test(x, sigma)
    assert "regularized" in r.notes


def test_ks_two_sample(rng):
    assert ks_two_sample_test(rng.standard_normal(4000), rng.standard_normal(3000)).passed
    assert not ks_two_sample_test(rng.standard_normal(4000), 0.2 + rng.standard_normal(4000)).passed
    r = ks_two_sample_test([0.0, 1.0], [2.0, 3.0])
    assert r.statistic == 1.0
    with pytest.raises(InvalidInputError):
        ks_two_sample_test([1.0], [1.0, 2.0])


def test_variance_and_mean_z(rng):
    x = 3.0 * rng.standard_normal(10000)
    assert variance_z_test(x, 9.0).passed
    assert not variance_z_test(x, 8.0).passed
    assert variance_z_test(x + 5, 9.0, mean=None).passed
    y = rng.standard_normal((10000, 2))
    assert mean_z_test(y, [0.0, 0.0]).passed
    assert not mean_z_test(y, [0.0, 0.1]).passed
    with pytest.raises(InvalidInputError):
        variance_z_test([1.0], 1.0)
