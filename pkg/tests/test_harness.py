import math

import numpy as np
import pytest

from spherclt import analytic, harness
from spherclt.analytic import ModelParams
from spherclt.errors import InvalidInputError
from spherclt.geometry import normalize
from spherclt.rng import BLOCK_SIZE, Stream, block_generator, block_slices, check_seed, ordered_map, resolve_threads
from spherclt.simulate import SimConfig
from spherclt.stats import covariance_test, empirical_covariance, entry_variances


def test_block_slices_and_ordered_map():
    assert block_slices(2500) == [(0, 0, 1024), (1, 1024, 2048), (2, 2048, 2500)]
    assert ordered_map(lambda x: x * x, list(range(20)), threads=4) == [x * x for x in range(20)]
    assert resolve_threads("auto") >= 1
    with pytest.raises(ValueError):
        resolve_threads(0)
    with pytest.raises(ValueError):
        check_seed(-1)


def test_streams_are_distinct():
    a = block_generator(1, Stream.SPHERE, 0).standard_normal(4)
    b = block_generator(1, Stream.OU, 0).standard_normal(4)
    c = block_generator(1, Stream.SPHERE, 1).standard_normal(4)
    again = block_generator(1, Stream.SPHERE, 0).standard_normal(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.array_equal(a, again)


def test_accumulation_identity(rng):
    states = rng.standard_normal((2, 2500, 3))
    s = harness.EnsembleSample.from_states([0.5, 1.0], states)
    assert s.is_consistent()
    assert np.allclose(s.sum, states.sum(axis=1), atol=1e-11)
    assert np.allclose(s.outer_sum, np.einsum("tki,tkj->tij", states, states), atol=1e-10)
    lean = harness.EnsembleSample.from_states([0.5, 1.0], states, retain_raw=False)
    assert np.array_equal(lean.sum, s.sum)
    with pytest.raises(InvalidInputError):
        lean.recompute()


def test_z_vanishes_at_time_zero():
    cfg = SimConfig(ModelParams(3, normalize([1.0, 1.0, 1.0])), dt=0.01, t_max=0.5, seed=1)
    zs = harness.build_z_samples(cfg, 100, [0.0, 0.5])
    assert np.array_equal(zs.z[0], np.zeros(3))
    assert not np.allclose(zs.z[1], 0.0)


def test_identical_paths_scale_by_sqrt_k():
    K = 2000
    cfg = SimConfig(ModelParams.canonical(3), dt=0.01, t_max=1.0, seed=2)
    zs = harness.build_z_samples(cfg, K, [1.0], identical=True)
    states = zs.ensemble.raw[0]
    assert np.all(states == states[0])
    expected = math.sqrt(K) * (states[0] - analytic.mean_theta(cfg.params, 1.0))
    assert np.allclose(zs.z[0], expected, rtol=1e-12, atol=1e-12)


def test_build_z_samples_errors():
    cfg = SimConfig(ModelParams.canonical(2), dt=0.1, t_max=1.0)
    with pytest.raises(InvalidInputError):
        harness.build_z_samples(cfg, 1, [1.0])
    with pytest.raises(InvalidInputError):
        harness.build_z_samples(cfg, 10, [0.55])
    with pytest.raises(InvalidInputError):
        harness.build_z_samples(cfg, 10, [1.0], centering="median")


def test_empirical_centering_option():
    cfg = SimConfig(ModelParams.canonical(3), dt=0.01, t_max=1.0, seed=3)
    zs = harness.build_z_samples(cfg, 500, [1.0], centering="empirical")
    assert np.allclose(zs.z[0], 0.0, atol=1e-12)
    assert np.allclose(np.asarray(zs.covariance(0)), np.cov(zs.ensemble.raw[0].T), atol=1e-14)


def test_clt_covariance_small_run():
    cfg = SimConfig(ModelParams.canonical(3), dt=1e-2, t_max=1.0, seed=4)
    zs = harness.build_z_samples(cfg, 8000, [0.5, 1.0])
    for i in range(2):
        reports = harness.clt_covariance_reports(zs, i)
        assert [r.name.split()[0] for r in reports] == ["clt-cov", "branch-along", "branch-orthogonal", "decorrelation"]
        assert all(r.passed for r in reports), [r.line() for r in reports]
        assert harness.clt_gaussianity_report(zs, i, group=40).passed


def test_gaussian_sampler_and_limit_sampler():
    g = block_generator(0, Stream.GAUSSIAN, 99)
    sigma = np.array([[1.0, 0.3], [0.3, 0.5]])
    x = harness.sample_gaussian(sigma, 40000, g)
    assert covariance_test(empirical_covariance(x, mean=np.zeros(2)), sigma, 40000).passed
    p = ModelParams.canonical(3)
    z = harness.simulate_z_infinity(p, 20000, 1.0, dt=1e-2, seed=5)
    assert covariance_test(empirical_covariance(z, mean=np.zeros(3)), analytic.z_infinity_cov(p, 1.0), 20000).passed
    z = harness.simulate_z_infinity(p, 20000, 10.0, dt=1e-2, seed=6)
    assert covariance_test(empirical_covariance(z, mean=np.zeros(3)), np.eye(3) / 3, 20000).passed


def test_decorrelation_detects_dependence(rng):
    p = ModelParams.canonical(3)
    x = rng.standard_normal((5000, 3))
    assert harness.component_correlation_test(x, p).passed
    x[:, 1] += 0.3 * x[:, 0]
    assert not harness.component_correlation_test(x, p).passed


def test_second_moment_reports_small():
    cfg = SimConfig(ModelParams.canonical(2), dt=1e-2, t_max=1.0, seed=7)
    reports, mats = harness.second_moment_reports(cfg, 5000, [0.25, 1.0])
    assert all(r.passed for r in reports), [r.line() for r in reports]
    assert set(mats) == {0.25, 1.0}


# -- generic martingale CLT -----------------------------------------------------


def diag_funcs(n):
    return [lambda s, i=i: 1.0 + 0.5 * (i + 1) * s for i in range(n)]


def test_integrand_targets():
    t = 1.3
    assert np.allclose(np.asarray(harness.IdentityIntegrand(3).target(t)), t * np.eye(3))
    d = np.asarray(harness.DiagonalIntegrand(diag_funcs(2)).target(t))
    expected = [((1 + 0.5 * k * t) ** 3 - 1) / (1.5 * k) for k in (1, 2)]
    assert np.allclose(d, np.diag(expected), atol=1e-12)
    p = ModelParams(3, normalize([1.0, 0.0, 1.0]))
    sphere = harness.SphereProjectionIntegrand(p)
    assert np.allclose(np.asarray(sphere.target(t)), np.asarray(analytic.integrated_q(p, t)), atol=1e-11)


@pytest.mark.parametrize("name", ["identity", "diagonal", "sphere"])
def test_generic_martingale_small(name):
    p = ModelParams.canonical(3)
    integrand = {
        "identity": harness.IdentityIntegrand(3),
        "diagonal": harness.DiagonalIntegrand(diag_funcs(3)),
        "sphere": harness.SphereProjectionIntegrand(p),
    }[name]
    rep, emp, target = harness.generic_martingale_clt(integrand, 5000, 1.0, 1e-2, seed=8)
    assert rep.passed, rep.line()
    assert emp.shape == target.shape == (3, 3)


def test_asymmetric_integrand_rejected():
    class Skew(harness.IdentityIntegrand):
        def matrices(self, state, s, size):
            return np.broadcast_to(np.triu(np.ones((self.n, self.n))), (size, self.n, self.n))

    with pytest.raises(InvalidInputError):
        harness.generic_martingale_clt(Skew(2), 10, 0.1, 0.05)


def test_martingale_thread_invariance():
    integrand = harness.SphereProjectionIntegrand(ModelParams.canonical(2))
    a = harness.simulate_martingale(integrand, 2 * BLOCK_SIZE + 5, 0.2, 0.01, seed=3, threads=1)
    b = harness.simulate_martingale(integrand, 2 * BLOCK_SIZE + 5, 0.2, 0.01, seed=3, threads=3)
    assert np.array_equal(a, b)


# -- correction martingales and OU --------------------------------------------


def test_plateau_horizon_tail():
    T = harness.plateau_horizon(2, 1e-3)
    tail = analytic.quadrature(lambda s: analytic.g0_integrand(2, s), T, math.inf, 1e-14).value
    assert tail < harness.TAIL_FRACTION * analytic.g0_variance(2)
    assert 2 < T < 20


def test_correction_plateau_small():
    reports = harness.proposition33_convergence_test(2, 4000, dt=1e-2, seed=9)
    assert [r.name.split()[0] for r in reports] == ["G0", "G'", "increasing-process"]
    assert all(r.passed for r in reports), [r.line() for r in reports]
    emp = reports[0].details["increasing_process"]
    assert emp == sorted(emp)


def test_ou_timechange_small():
    rep, a, b = harness.ou_timechange_test(1.0, 0.5, 3000, dt=1e-2, seed=10)
    assert rep.passed, rep.line()
    assert rep.details["alpha_t"] == pytest.approx((math.e - 1) / 2, rel=1e-15)
    assert a.shape == b.shape == (3000,)


def test_self_calibration_reduced():
    reports = harness.self_calibration(20, K=1000, seed=1, max_failures=2)
    assert len(reports) == 7
    assert all(r.passed for r in reports), [r.line() for r in reports]
