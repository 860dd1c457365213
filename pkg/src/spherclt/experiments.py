"""Named experiment suites and their configuration."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import analytic, harness
from .analytic import ModelParams
from .errors import InvalidInputError
from .geometry import UnitVector, normalize
from .simulate import Scheme, SimConfig
from .stats import TestReport

EXPERIMENTS = (
    "moments",
    "clt-cov",
    "clt-gauss",
    "prop33",
    "ou-mean-decay",
    "ou-timechange",
    "martingale-generic",
    "selfcal",
)

# keys that do not change results and are left out of the config hash
NON_SEMANTIC = ("out_dir", "threads")


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 3
    theta0: object = "e1"
    lambda_: float = 0.0
    K: int = 10000
    dt: float = 1e-3
    t_max: float | None = None
    eval_times: list = field(default_factory=lambda: [1.0])
    seed: int = 0
    out_dir: str = "spherclt-out"
    threads: object = "auto"
    radius: float = 1.0
    scheme: str = Scheme.PROJECTED_EULER.value
    normalize_theta0: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        self.n = _as_int(self.n, "n")
        if self.n < 2:
            raise InvalidInputError("n must be >= 2")
        self.K = _as_int(self.K, "K")
        if self.K < 2:
            raise InvalidInputError("K must be >= 2")
        self.seed = _as_int(self.seed, "seed")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        self.dt = _as_float(self.dt, "dt")
        self.lambda_ = _as_float(self.lambda_, "lambda")
        self.radius = _as_float(self.radius, "radius")
        self.eval_times = [_as_float(t, "eval_times") for t in _as_list(self.eval_times)]
        if not self.eval_times or min(self.eval_times) < 0:
            raise InvalidInputError("eval_times must be a non-empty list of times >= 0")
        self.eval_times = sorted(self.eval_times)
        if self.t_max is None:
            self.t_max = max(self.eval_times)
        self.t_max = _as_float(self.t_max, "t_max")
        if max(self.eval_times) > self.t_max:
            raise InvalidInputError("eval_times must not exceed t_max")
        if self.threads != "auto":
            self.threads = _as_int(self.threads, "threads")
            if self.threads < 1:
                raise InvalidInputError("threads must be >= 1 or 'auto'")
        self.scheme = Scheme(self.scheme).value
        self.normalize_theta0 = bool(self.normalize_theta0)
        self.theta0 = _theta0_coords(self.theta0, self.n, self.normalize_theta0)
        # fail early on constraints the simulator enforces
        SimConfig(self.params(), self.dt, self.t_max, self.scheme if self.scheme in ("projected-euler", "tangent-euler") else Scheme.PROJECTED_EULER, self.seed)

    def params(self) -> ModelParams:
        return ModelParams(self.n, UnitVector(self.theta0), self.lambda_, self.radius)

    def sim_config(self, **changes) -> SimConfig:
        d = dict(params=self.params(), dt=self.dt, t_max=self.t_max, scheme=self.scheme, seed=self.seed)
        d.update(changes)
        return SimConfig(**d)

    def resolved(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d

    def semantic(self) -> dict:
        return {k: v for k, v in self.resolved().items() if k not in NON_SEMANTIC}


def _as_int(v, name):
    if isinstance(v, bool):
        raise InvalidInputError(f"{name} must be an integer")
    try:
        f = float(v)
        i = int(f)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be an integer, got {v!r}") from None
    if i != f:
        raise InvalidInputError(f"{name} must be an integer, got {v!r}")
    return i


def _as_float(v, name):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a number, got {v!r}") from None
    if not math.isfinite(f):
        raise InvalidInputError(f"{name} must be finite")
    return f


def _as_list(v):
    if isinstance(v, str):
        return [s for s in re.split(r"[,\s]+", v.strip()) if s]
    if isinstance(v, (int, float)):
        return [v]
    return list(v)


def _theta0_coords(v, n: int, normalize_theta0: bool) -> list:
    if isinstance(v, str) and re.fullmatch(r"e\d+", v.strip()):
        i = int(v.strip()[1:]) - 1
        return UnitVector.basis(n, i).coords.tolist()
    coords = np.array([_as_float(x, "theta0") for x in _as_list(v)])
    if coords.size != n:
        raise InvalidInputError(f"theta0 has {coords.size} coordinates, expected n = {n}")
    if normalize_theta0:
        return normalize(coords).coords.tolist()
    return UnitVector(coords).coords.tolist()


@dataclass
class ExperimentResult:
    reports: list[TestReport]
    # CSV file name -> list of (t, matrix)
    matrices: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def _sphere_cfg(cfg: ExperimentConfig) -> SimConfig:
    if cfg.scheme not in ("projected-euler", "tangent-euler"):
        raise InvalidInputError(f"{cfg.experiment} needs a sphere scheme")
    return cfg.sim_config()


def _brownian_only(cfg: ExperimentConfig):
    if cfg.lambda_ != 0:
        raise InvalidInputError(f"{cfg.experiment} compares against lambda = 0 closed forms; set --lambda 0")


def run_moments(cfg: ExperimentConfig) -> ExperimentResult:
    _brownian_only(cfg)
    reports, mats = harness.second_moment_reports(_sphere_cfg(cfg), cfg.K, cfg.eval_times, threads=cfg.threads)
    return ExperimentResult(
        reports,
        {
            "moments_empirical.csv": [(t, m[0]) for t, m in mats.items()],
            "moments_analytic.csv": [(t, m[1]) for t, m in mats.items()],
        },
    )


def run_clt_cov(cfg: ExperimentConfig) -> ExperimentResult:
    _brownian_only(cfg)
    zs = harness.build_z_samples(_sphere_cfg(cfg), cfg.K, cfg.eval_times, threads=cfg.threads)
    reports, emp, ana = [], [], []
    for i, t in enumerate(zs.times):
        if t == 0:
            continue
        reports.extend(harness.clt_covariance_reports(zs, i))
        emp.append((float(t), np.asarray(zs.covariance(i))))
        ana.append((float(t), np.asarray(analytic.z_infinity_cov(zs.params, t))))
    return ExperimentResult(reports, {"covariance_empirical.csv": emp, "covariance_analytic.csv": ana})


def run_clt_gauss(cfg: ExperimentConfig) -> ExperimentResult:
    _brownian_only(cfg)
    zs = harness.build_z_samples(_sphere_cfg(cfg), cfg.K, cfg.eval_times, threads=cfg.threads)
    group = max(10, min(100, cfg.K // 20))
    return ExperimentResult([harness.clt_gaussianity_report(zs, i, group) for i, t in enumerate(zs.times) if t > 0])


def run_prop33(cfg: ExperimentConfig) -> ExperimentResult:
    n = cfg.n
    g0 = analytic.g0_variance_check(n)
    gp = analytic.gprime_variance_check(n)
    reports = [
        TestReport(f"g0 closed form n={n}", g0.discrepancy, analytic.G0_CROSSCHECK_TOL, False, 0,
                   notes="|quadrature - continued Beta form|",
                   details={"quadrature": g0.quadrature, "beta_form": g0.closed_form, "printed_form": g0.printed_form}),
        TestReport(f"gprime closed form n={n}", gp.discrepancy, 1e-6, False, 0,
                   notes="|quadrature - 2F1 form|",
                   details={"quadrature": gp.quadrature, "hypergeometric_form": gp.closed_form}),
    ]
    reports += harness.proposition33_convergence_test(n, cfg.K, dt=cfg.dt, seed=cfg.seed, threads=cfg.threads)
    return ExperimentResult(reports)


def run_ou_mean_decay(cfg: ExperimentConfig) -> ExperimentResult:
    if len(cfg.eval_times) >= 2:
        lo, hi, pts = cfg.eval_times[0], cfg.eval_times[-1], len(cfg.eval_times)
    else:
        lo, hi, pts = 0.2, cfg.t_max, 10
    rep = harness.ou_mean_decay_test(cfg.params(), cfg.K, dt=cfg.dt, t_lo=lo, t_hi=hi, points=pts,
                                     scheme=Scheme(cfg.scheme), seed=cfg.seed, threads=cfg.threads)
    return ExperimentResult([rep])


def run_ou_timechange(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.n != 2:
        raise InvalidInputError("ou-timechange is a planar experiment; use --n 2")
    reports = []
    for t in cfg.eval_times:
        if t > 0:
            rep, _, _ = harness.ou_timechange_test(cfg.lambda_, t, cfg.K, dt=cfg.dt, radius=cfg.radius, seed=cfg.seed, threads=cfg.threads)
            reports.append(rep)
    return ExperimentResult(reports)


def diagonal_rates(n: int) -> list[Callable[[float], float]]:
    return [lambda s, i=i: 1.0 + 0.5 * (i + 1) * s for i in range(n)]


def run_martingale_generic(cfg: ExperimentConfig) -> ExperimentResult:
    _brownian_only(cfg)
    t = cfg.t_max
    integrands = [
        harness.IdentityIntegrand(cfg.n),
        harness.SphereProjectionIntegrand(cfg.params(), Scheme(cfg.scheme)),
        harness.DiagonalIntegrand(diagonal_rates(cfg.n)),
    ]
    reports, emp, ana = [], [], []
    for integrand in integrands:
        rep, e, a = harness.generic_martingale_clt(integrand, cfg.K, t, cfg.dt, seed=cfg.seed, threads=cfg.threads)
        reports.append(rep)
        emp.append((t, e))
        ana.append((t, a))
    # one matrix block per integrand, in the order identity, sphere, diagonal
    return ExperimentResult(reports, {"covariance_empirical.csv": emp, "covariance_analytic.csv": ana})


def run_selfcal(cfg: ExperimentConfig) -> ExperimentResult:
    return ExperimentResult(harness.self_calibration(200, K=cfg.K, seed=cfg.seed, n=cfg.n))


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "moments": run_moments,
    "clt-cov": run_clt_cov,
    "clt-gauss": run_clt_gauss,
    "prop33": run_prop33,
    "ou-mean-decay": run_ou_mean_decay,
    "ou-timechange": run_ou_timechange,
    "martingale-generic": run_martingale_generic,
    "selfcal": run_selfcal,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
