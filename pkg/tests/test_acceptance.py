"""Acceptance suite.

Each criterion prints exactly one ``PASS``/``FAIL`` line, also when run as a
script (``python tests/test_acceptance.py``). The sizes, step lengths and
tolerances are the ones the criteria state; nothing is relaxed to make a
criterion pass.
"""

import functools
import math
import sys
import time

import numpy as np
import pytest

from spherclt import analytic, harness
from spherclt.analytic import ModelParams
from spherclt.cli import main as cli_main
from spherclt.experiments import diagonal_rates
from spherclt.geometry import normalize, projection_matrix
from spherclt.simulate import SimConfig

pytestmark = pytest.mark.slow

THREADS = "auto"
SEED = 42


_capture = None


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    global _capture
    _capture = capsys
    yield
    _capture = None


def announce(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    with _capture.disabled():
        print(f"\n{line}", flush=True)
    return line


def summarize(reports):
    def severity(r):
        if r.threshold:
            return r.statistic / r.threshold
        return math.inf if r.statistic else 0.0

    worst = max(reports, key=severity)
    failed = [r.name for r in reports if not r.passed]
    text = f"{len(reports) - len(failed)}/{len(reports)} checks pass; worst {worst.name} statistic={worst.statistic:.4g} threshold={worst.threshold:.4g}"
    if failed:
        text += "; failing: " + ", ".join(failed)
    return not failed, text


@functools.lru_cache(maxsize=None)
def clt_run():
    """The n = 3 ensemble shared by criteria 3 and 4."""
    cfg = SimConfig(ModelParams.canonical(3), dt=1e-3, t_max=2.0, seed=SEED)
    return harness.build_z_samples(cfg, 50000, [0.5, 1.0, 2.0], threads=THREADS)


# 1 -------------------------------------------------------------------------


def test_criterion_1_algebraic_identities():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = {"idempotence": 0.0, "spectral": 0.0, "sqrt": 0.0}
    for _ in range(200):
        n = int(rng.integers(2, 11))
        p = ModelParams(n, normalize(rng.standard_normal(n)))
        s = float(rng.uniform(0, 5))
        sig = np.asarray(projection_matrix(p.theta0))
        worst["idempotence"] = max(worst["idempotence"], np.linalg.norm(sig @ sig - sig))
        q = np.asarray(analytic.q_matrix(p, s))
        along, orth = analytic.q_eigenvalues(p, s)
        th = p.theta0.coords
        rebuilt = along * np.outer(th, th) + orth * sig
        spectral_err = max(np.linalg.norm(q - rebuilt), np.max(np.abs(np.sort(np.linalg.eigvalsh(q)) - np.sort([along] + [orth] * (n - 1)))))
        worst["spectral"] = max(worst["spectral"], spectral_err)
        lam = np.asarray(analytic.lambda_sqrt(p, s))
        worst["sqrt"] = max(worst["sqrt"], np.linalg.norm(lam @ lam - q))
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-12 for v in worst.values()) and elapsed < 1.0
    detail = ", ".join(f"max {k} error {v:.2e}" for k, v in worst.items()) + f", runtime {elapsed:.3f}s (limits 1e-12, 1 s)"
    announce(1, "algebraic identities", ok, detail)
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_2_second_moments():
    reports = []
    for n in (2, 3, 5):
        cfg = SimConfig(ModelParams.canonical(n), dt=1e-3, t_max=1.0, seed=SEED)
        reps, _ = harness.second_moment_reports(cfg, 50000, [0.25, 1.0], threads=THREADS)
        for r in reps:
            r.name = f"n={n} {r.name}"
        reports += reps
    ok, detail = summarize(reports)
    announce(2, "moment formula vs Monte Carlo", ok, detail)
    assert ok


# 3, 4 ----------------------------------------------------------------------


def test_criterion_3_clt_covariance():
    zs = clt_run()
    reports = []
    for i in range(len(zs.times)):
        reports += harness.clt_covariance_reports(zs, i)
    ok, detail = summarize(reports)
    announce(3, "CLT covariance and eigen-branches", ok, detail)
    assert ok


def test_criterion_4_gaussianity():
    zs = clt_run()
    reports = [harness.clt_gaussianity_report(zs, i, group=100) for i in range(len(zs.times))]
    ok, detail = summarize(reports)
    announce(4, "Gaussianity of the limit", ok, detail + "; 500 batch means of 100 paths per time")
    assert ok


# 5 -------------------------------------------------------------------------


def test_criterion_5_long_time_limit():
    reports = []
    for n in (2, 3):
        cfg = SimConfig(ModelParams.canonical(n), dt=1e-3, t_max=10.0, seed=SEED)
        rep, _ = harness.long_time_report(cfg, 20000, 10.0, threads=THREADS)
        rep.name = f"n={n} {rep.name}"
        reports.append(rep)
    ok, detail = summarize(reports)
    announce(5, "long-time limit Id/n", ok, detail)
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_6_correction_variances():
    errs = {
        "g0(2) vs pi-3": abs(analytic.g0_variance(2) - (math.pi - 3)),
        "gprime(2) vs closed form": abs(analytic.gprime_variance(2) - (2 * math.sqrt(2) - 2 * math.log(1 + math.sqrt(2)) - 1)),
    }
    hyp = max(analytic.gprime_variance_check(n).discrepancy for n in range(2, 13))
    closed_ok = all(v <= 1e-8 for v in errs.values()) and hyp <= 1e-6
    plateau = harness.proposition33_convergence_test(2, 20000, dt=1e-3, seed=SEED, threads=THREADS)
    sim_ok, sim_detail = summarize(plateau)
    ok = closed_ok and sim_ok
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + f", 2F1 vs quadrature n=2..12 max {hyp:.1e}; plateau: {sim_detail}"
    announce(6, "correction martingale variances", ok, detail)
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_7_generic_martingale():
    p = ModelParams.canonical(3)
    integrands = [
        harness.IdentityIntegrand(3),
        harness.SphereProjectionIntegrand(p),
        harness.DiagonalIntegrand(diagonal_rates(3)),
    ]
    reports = [harness.generic_martingale_clt(h, 20000, 1.0, 1e-3, seed=SEED, threads=THREADS)[0] for h in integrands]
    ok, detail = summarize(reports)
    announce(7, "generic martingale CLT", ok, detail)
    assert ok


# 8 -------------------------------------------------------------------------


def test_criterion_8_ou_mean_decay():
    reports = []
    for n in (2, 3):
        for lam in (0.5, 1.0):
            reports.append(harness.ou_mean_decay_test(ModelParams.canonical(n, lam), 20000, dt=1e-3, seed=SEED, threads=THREADS))
    ok, detail = summarize(reports)
    rates = "; ".join(
        f"{r.name.removeprefix('ou-mean-decay ')}: fitted rate {r.details['fitted_rate']:.4f}, target {r.details['target_rate']:.4f}"
        for r in reports
    )
    announce(8, "sphere OU mean decay", ok, detail + "; " + rates)
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_9_time_change():
    rep, _, _ = harness.ou_timechange_test(1.0, 0.5, 10000, dt=1e-3, seed=SEED, threads=THREADS)
    ok, detail = summarize([rep])
    announce(9, "OU time change", ok, detail + f"; alpha_t={rep.details['alpha_t']:.6f}")
    assert ok


# 10 ------------------------------------------------------------------------


def test_criterion_10_self_calibration():
    reports = harness.self_calibration(200, K=2000, seed=SEED, max_failures=4)
    ok, _ = summarize(reports)
    counts = ", ".join(f"{r.name.removeprefix('selfcal ')} {int(r.statistic)}" for r in reports)
    announce(10, "statistical self-calibration", ok, f"null failures out of 200 (limit 4): {counts}")
    assert ok


# 11 ------------------------------------------------------------------------


def test_criterion_11_determinism(tmp_path):
    args = ["clt-cov", "--n", "3", "--K", "50000", "--dt", "1e-3", "--eval-times", "0.5,1,2", "--seed", str(SEED)]
    codes = [cli_main([*args, "--threads", th, "--out-dir", str(tmp_path / f"t{th}")]) for th in ("1", "2")]
    blobs = [(tmp_path / f"t{th}" / "report.json").read_bytes() for th in ("1", "2")]
    ok = blobs[0] == blobs[1]
    announce(11, "determinism", ok, f"report.json byte-identical under 1 and 2 threads: {ok} ({len(blobs[0])} bytes, exit codes {codes})")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
