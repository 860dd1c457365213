"""Statistical comparisons between ensembles and analytic targets.

Every test returns a :class:`TestReport` with the convention
``passed == (statistic <= threshold)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import InvalidInputError
from .geometry import SymMatrix

Z_THRESHOLD = 4.0
# asymptotic 1% critical value of the Kolmogorov distribution
KS_CRITICAL_1PCT = 1.628


@dataclass
class TestReport:
    name: str
    statistic: float
    threshold: float
    passed: bool
    K: int
    notes: str = ""
    details: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        self.passed = bool(self.statistic <= self.threshold)

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g} K={self.K}"


def _samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidInputError("samples must be a (count, n) array")
    return x


def empirical_covariance(samples, mean=None) -> SymMatrix:
    """Sample covariance.

    Without ``mean`` the sample mean is removed and the divisor is
    ``count - 1``; with a known ``mean`` the divisor is ``count``.
    """
    x = _samples(samples)
    count = x.shape[0]
    if count < 2:
        raise InvalidInputError("need at least 2 samples")
    if mean is None:
        d = x - x.mean(axis=0)
        return SymMatrix(d.T @ d / (count - 1))
    d = x - np.asarray(mean, dtype=float)
    return SymMatrix(d.T @ d / count)


def entry_variances(samples, mean=None) -> np.ndarray:
    """Sampling variance of each covariance entry from fourth moments.

    ``Var(c_ij) ~ (E[d_i^2 d_j^2] - c_ij^2) / count``. Use this instead of
    the Gaussian formula when the samples are visibly non-Gaussian, as
    individual points on a sphere are.
    """
    x = _samples(samples)
    count = x.shape[0]
    d = x - (x.mean(axis=0) if mean is None else np.asarray(mean, dtype=float))
    c = d.T @ d / count
    d2 = d * d
    m4 = d2.T @ d2 / count
    return np.maximum(m4 - c * c, 0.0) / count


def covariance_test(
    empirical,
    analytic,
    K: int,
    *,
    threshold: float = Z_THRESHOLD,
    entry_var=None,
    name: str = "covariance",
) -> TestReport:
    """Largest entrywise z-score between two covariance matrices.

    By default the sampling variance of each entry is the Gaussian value
    ``(c_ii c_jj + c_ij^2) / K`` taken from the analytic matrix;
    ``entry_var`` overrides it.
    """
    e = np.asarray(empirical, dtype=float)
    a = np.asarray(analytic, dtype=float)
    if e.shape != a.shape or e.ndim != 2:
        raise InvalidInputError(f"shape mismatch {e.shape} vs {a.shape}")
    if entry_var is None:
        d = np.diag(a)
        var = (np.outer(d, d) + a * a) / K
        basis = "gaussian"
    else:
        var = np.asarray(entry_var, dtype=float)
        basis = "fourth-moment"
    diff = e - a
    iu = np.triu_indices(a.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, diff / np.sqrt(var), np.where(diff == 0, 0.0, np.inf))
    zmax = float(np.max(np.abs(z[iu])))
    return TestReport(
        name,
        zmax,
        threshold,
        zmax <= threshold,
        K,
        notes=f"max entrywise |z|, {basis} entry variances",
        details={"frobenius": float(np.linalg.norm(diff)), "z": z.tolist()},
    )


def mahalanobis_distances(samples, cov) -> np.ndarray:
    x = _samples(samples)
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    w = np.linalg.solve(chol, x.T)
    return np.einsum("ij,ij->j", w, w)


def mahalanobis_chi2_test(samples, analytic, *, regularize: float = 1e-12, name: str = "mahalanobis-chi2") -> TestReport:
    """KS distance between squared Mahalanobis norms and chi-square(n).

    ``analytic`` is used as the covariance of a zero-mean Gaussian; a
    near-singular matrix is regularized by ``regularize * Id`` and the
    choice is recorded in the report.
    """
    x = _samples(samples)
    sigma = np.asarray(analytic, dtype=float)
    n = sigma.shape[0]
    if x.shape[1] != n:
        raise InvalidInputError("sample dimension does not match covariance")
    count = x.shape[0]
    notes = "KS of d^2 vs chi2(n), 1% asymptotic critical value"
    try:
        d2 = mahalanobis_distances(x, sigma)
    except np.linalg.LinAlgError:
        if not regularize:
            raise
        sigma = sigma + regularize * np.eye(n)
        d2 = mahalanobis_distances(x, sigma)
        notes += f"; covariance regularized by {regularize:g} Id"
    ks = sps.kstest(d2, sps.chi2(n).cdf).statistic
    return TestReport(
        name,
        ks,
        KS_CRITICAL_1PCT / math.sqrt(count),
        False,
        count,
        notes=notes,
        details={"mean_d2": float(d2.mean()), "n": n},
    )


def ks_two_sample_test(a, b, *, name: str = "ks-two-sample") -> TestReport:
    """Two-sample KS at the asymptotic 1% level."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise InvalidInputError("need at least 2 samples on each side")
    stat = sps.ks_2samp(a, b).statistic
    crit = KS_CRITICAL_1PCT * math.sqrt((a.size + b.size) / (a.size * b.size))
    return TestReport(name, stat, crit, False, min(a.size, b.size), notes="two-sample KS, 1% asymptotic critical value")


def variance_z_test(samples, target: float, *, mean: float | None = 0.0, threshold: float = Z_THRESHOLD, name: str = "variance") -> TestReport:
    """|sample variance - target| in units of its standard error.

    The standard error uses the sample's own fourth moment.
    """
    x = np.asarray(samples, dtype=float).ravel()
    count = x.size
    if count < 2:
        raise InvalidInputError("need at least 2 samples")
    d = x - (x.mean() if mean is None else mean)
    d2 = d * d
    v = d2.sum() / (count if mean is not None else count - 1)
    se = math.sqrt(max(float(np.mean(d2 * d2) - np.mean(d2) ** 2), 0.0) / count)
    z = abs(v - target) / se if se > 0 else (0.0 if v == target else math.inf)
    return TestReport(name, z, threshold, False, count, notes="|var - target| / SE", details={"variance": float(v), "target": float(target), "se": se})


def mean_z_test(samples, target, *, threshold: float = Z_THRESHOLD, name: str = "mean") -> TestReport:
    """Largest coordinatewise |mean - target| / SE."""
    x = _samples(samples)
    count = x.shape[0]
    m = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / math.sqrt(count)
    diff = m - np.asarray(target, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.inf))
    zmax = float(np.max(np.abs(z)))
    return TestReport(name, zmax, threshold, False, count, notes="max coordinate |mean - target| / SE", details={"mean": m.tolist()})
