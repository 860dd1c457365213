"""Closed-form moments, covariance rates and limit variances.

Notation used throughout: ``theta0`` is the common starting point, ``P0`` is
the tangent projector ``Id - theta0 theta0^T`` and ``e = exp(-n s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CrossCheckError, InvalidInputError
from .geometry import SymMatrix, UnitVector, projection_matrix
from .quadrature import quadrature
from .special import beta_continued, gamma, gauss_2f1

VARIANCE_QUAD_TOL = 1e-13
G0_CROSSCHECK_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Ensemble parameters.

    ``lam`` is the Ornstein-Uhlenbeck mean-reversion rate (0 gives plain
    spherical Brownian motion). ``radius`` only matters for the Euclidean OU
    process, which starts at ``radius * theta0``.
    """

    n: int
    theta0: UnitVector
    lam: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidInputError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.theta0, UnitVector):
            object.__setattr__(self, "theta0", UnitVector(self.theta0))
        if self.theta0.n != self.n:
            raise InvalidInputError(f"theta0 has dimension {self.theta0.n}, expected {self.n}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidInputError(f"lambda must be finite and >= 0, got {self.lam!r}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidInputError(f"radius must be positive, got {self.radius!r}")

    @classmethod
    def canonical(cls, n: int, lam: float = 0.0, radius: float = 1.0) -> "ModelParams":
        return cls(n, UnitVector.basis(n), lam, radius)

    @property
    def z0(self) -> np.ndarray:
        return self.radius * self.theta0.coords


def _check_time(t: float, name: str = "t") -> float:
    t = float(t)
    if not t >= 0:
        raise InvalidInputError(f"{name} must be >= 0, got {t!r}")
    return t


def _require_brownian(p: ModelParams, what: str):
    if p.lam != 0:
        raise InvalidInputError(f"{what} is only defined for lambda = 0 (spherical Brownian motion)")


# -- moments -----------------------------------------------------------------


def second_moment(p: ModelParams, m, m2, t: float) -> float:
    """E[(m . Theta_t)(m2 . Theta_t)] for spherical Brownian motion."""
    _require_brownian(p, "second_moment")
    t = _check_time(t)
    m = np.asarray(m, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    if m.shape != (p.n,) or m2.shape != (p.n,):
        raise InvalidInputError("moment directions must have length n")
    c = p.theta0.coords
    e = math.exp(-p.n * t)
    return float(e * (m @ c) * (m2 @ c) + (m @ m2) * (-math.expm1(-p.n * t)) / p.n)


def second_moment_matrix(p: ModelParams, t: float) -> SymMatrix:
    """All second moments at once: ``E[Theta_t Theta_t^T]``."""
    _require_brownian(p, "second_moment_matrix")
    t = _check_time(t)
    c = p.theta0.coords
    e = math.exp(-p.n * t)
    return SymMatrix(e * np.outer(c, c) + (-math.expm1(-p.n * t)) / p.n * np.eye(p.n))


def mean_theta(p: ModelParams, t: float) -> np.ndarray:
    """E[Theta_t] = theta0 * exp(-((n-1)/2 + lam) t)."""
    t = _check_time(t)
    return p.theta0.coords * math.exp(-((p.n - 1) / 2 + p.lam) * t)


def sphere_drift_rate(p: ModelParams) -> float:
    return (p.n - 1) / 2 + p.lam


# -- the covariance rate Q(s) and its square root ----------------------------


def q_matrix(p: ModelParams, s: float) -> SymMatrix:
    """Q(s) = E[Id - Theta_s Theta_s^T]."""
    _require_brownian(p, "q_matrix")
    s = _check_time(s, "s")
    n = p.n
    c = p.theta0.coords
    e = math.exp(-n * s)
    return SymMatrix((1.0 + math.expm1(-n * s) / n) * np.eye(n) - e * np.outer(c, c))


def q_eigenvalues(p: ModelParams, s: float) -> tuple[float, float]:
    """(eigenvalue along theta0, eigenvalue on the orthogonal hyperplane)."""
    s = _check_time(s, "s")
    n = p.n
    e = math.exp(-n * s)
    return (1 - 1 / n) * (-math.expm1(-n * s)), (1 - 1 / n) * (1 + e / (n - 1))


def lambda_coefficients(n: int, s: float) -> tuple[float, float]:
    """(a, b) with sqrt(Q(s)) = a Id + b P0."""
    s = _check_time(s, "s")
    e = math.exp(-n * s)
    k = math.sqrt(1 - 1 / n)
    root_along = math.sqrt(-math.expm1(-n * s))
    root_orth = math.sqrt(1 + e / (n - 1))
    return k * root_along, k * (root_orth - root_along)


def lambda_sqrt(p: ModelParams, s: float) -> SymMatrix:
    """Symmetric PSD square root of Q(s), built from the projector algebra.

    Since ``P0`` is idempotent, ``(a Id + b P0)^2 = a^2 Id + (2ab + b^2) P0``,
    so only the two eigenvalues of Q need a square root. The radical on the
    hyperplane is ``sqrt(1 + e/(n-1))``; with a minus sign there the square
    no longer reproduces Q.
    """
    _require_brownian(p, "lambda_sqrt")
    a, b = lambda_coefficients(p.n, s)
    return SymMatrix(a * np.eye(p.n) + b * np.asarray(projection_matrix(p.theta0)))


def integrated_q(p: ModelParams, t: float) -> SymMatrix:
    """Quadratic variation of the limit martingale: int_0^t Q(s) ds."""
    _require_brownian(p, "integrated_q")
    t = _check_time(t)
    n = p.n
    c = p.theta0.coords
    one_minus_e = -math.expm1(-n * t)
    return SymMatrix((t * (1 - 1 / n) + one_minus_e / n**2) * np.eye(n) - one_minus_e / n * np.outer(c, c))


# -- covariance of the limit process -----------------------------------------


def z_infinity_branches(p: ModelParams, t: float) -> tuple[float, float]:
    """Variances of the limit Z_t along theta0 and orthogonal to it.

    Both come from ``Sigma(t) = int_0^t exp(-(n-1)(t-s)) Q(s) ds`` applied to
    the two eigen-directions of Q.
    """
    t = _check_time(t)
    n = p.n
    orth = -math.expm1(-n * t) / n
    # exp(-nt) - exp(-(n-1)t) = -exp(-(n-1)t) (1 - exp(-t))
    along = orth + math.exp(-(n - 1) * t) * math.expm1(-t)
    return along, orth


def z_infinity_cov(p: ModelParams, t: float) -> SymMatrix:
    """Covariance of the Gaussian limit Z_t (equivalently Cov(Theta_t))."""
    _require_brownian(p, "z_infinity_cov")
    along, orth = z_infinity_branches(p, t)
    c = p.theta0.coords
    return SymMatrix(orth * np.eye(p.n) + (along - orth) * np.outer(c, c))


def z_infinity_cov_quadrature(p: ModelParams, t: float, tol: float = 1e-13) -> SymMatrix:
    """Same covariance by entrywise numerical integration of the isometry."""
    _require_brownian(p, "z_infinity_cov_quadrature")
    t = _check_time(t)
    n = p.n
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            def f(s, i=i, j=j):
                return math.exp(-(n - 1) * (t - s)) * q_matrix(p, s).entries[i, j]

            out[i, j] = out[j, i] = quadrature(f, 0.0, t, tol).value
    return SymMatrix(out)


# -- limit variances of the two correction martingales ------------------------


@dataclass(frozen=True)
class VarianceCheck:
    """A limit variance evaluated two independent ways."""

    n: int
    quadrature: float
    closed_form: float
    printed_form: float | None = None

    @property
    def discrepancy(self) -> float:
        return abs(self.quadrature - self.closed_form)


def _check_n(n) -> int:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidInputError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def g0_integrand(n: int, s: float) -> float:
    """Rate of the increasing process of G0: e^{(n-1)s} (sqrt(1-e^{-ns}) - 1)^2."""
    # (sqrt(1-e)-1)^2 = e^2 / (1+sqrt(1-e))^2, and e^{(n-1)s} e^2 = e^{-(n+1)s}
    e = math.exp(-n * s)
    return math.exp(-(n + 1) * s) / (1 + math.sqrt(1 - e)) ** 2


def gprime_integrand(n: int, s: float) -> float:
    """Rate of the increasing process of each component of G'."""
    e = math.exp(-n * s)
    return math.exp(-(n + 1) * s) / ((n - 1) ** 2 * (1 + math.sqrt(1 + e / (n - 1))) ** 2)


def _g0_quadrature(n: int) -> float:
    # u = exp(-ns): (1/n) int_0^1 u^{-2+1/n} (sqrt(1-u) - 1)^2 du, with the
    # square rewritten as u^2/(1+sqrt(1-u))^2 so the u -> 0 end is u^{1/n}/4.
    def f(u):
        return u ** (1 / n) / (1 + math.sqrt(1 - u)) ** 2 / n

    return quadrature(f, 0.0, 1.0, VARIANCE_QUAD_TOL).value


def _gprime_quadrature(n: int) -> float:
    def f(u):
        return u ** (1 / n) / (n - 1) ** 2 / (1 + math.sqrt(1 + u / (n - 1))) ** 2 / n

    return quadrature(f, 0.0, 1.0, VARIANCE_QUAD_TOL).value


def g0_beta_form(n: int) -> float:
    """(1/n){B(-1+1/n, 2) - 2 B(-1+1/n, 3/2)} - 1/(n-1), via continued Beta."""
    n = _check_n(n)
    a = -1 + 1 / n
    return (beta_continued(a, 2.0) - 2 * beta_continued(a, 1.5)) / n - 1 / (n - 1)


def g0_printed_form(n: int) -> float:
    """The Gamma-ratio simplification as usually displayed.

    Its Gamma-ratio term carries the wrong sign: at n = 2 it gives -pi - 3.
    Kept for reporting only.
    """
    n = _check_n(n)
    return math.sqrt(math.pi) * gamma(-1 + 1 / n) / (n * gamma(0.5 + 1 / n)) - (n + 1) / (n - 1)


def g0_variance_check(n: int) -> VarianceCheck:
    n = _check_n(n)
    return VarianceCheck(n, _g0_quadrature(n), g0_beta_form(n), g0_printed_form(n))


def g0_variance(n: int) -> float:
    """Limit variance of G0 (the theta0 component), by quadrature.

    The continued-Beta closed form is evaluated alongside and must agree to
    ``1e-8``; a larger gap raises :class:`CrossCheckError`.
    """
    chk = g0_variance_check(n)
    if chk.discrepancy > G0_CROSSCHECK_TOL:
        raise CrossCheckError(f"g0 variance: quadrature {chk.quadrature!r} vs Beta form {chk.closed_form!r}")
    return chk.quadrature


def gprime_hypergeometric_form(n: int) -> float:
    """(2 2F1(-1/2, -1+1/n; 1/n; 1/(1-n)) - 1) / (n-1)."""
    n = _check_n(n)
    return (2 * gauss_2f1(-0.5, -1 + 1 / n, 1 / n, 1 / (1 - n)) - 1) / (n - 1)


def gprime_variance_check(n: int) -> VarianceCheck:
    n = _check_n(n)
    hyp = gprime_hypergeometric_form(n)
    return VarianceCheck(n, _gprime_quadrature(n), hyp, hyp)


def gprime_variance(n: int) -> float:
    """Limit variance of each hyperplane component of G', by quadrature."""
    return gprime_variance_check(n).quadrature


# -- Euclidean Ornstein-Uhlenbeck moments ------------------------------------


def ou_mean(p: ModelParams, t: float) -> np.ndarray:
    t = _check_time(t)
    return p.z0 * math.exp(-p.lam * t)


def ou_coordinate_variance(lam: float, t: float) -> float:
    """(1 - e^{-2 lam t}) / (2 lam), equal to t when lam = 0."""
    t = _check_time(t)
    if lam == 0:
        return t
    return -math.expm1(-2 * lam * t) / (2 * lam)


def ou_time_change(t: float, lam: float) -> float:
    """Planar-BM clock alpha_t = (e^{2 lam t} - 1) / (2 lam); alpha_t = t at lam = 0."""
    t = _check_time(t)
    if not lam >= 0:
        raise InvalidInputError("lambda must be >= 0")
    if lam == 0:
        return t
    return math.expm1(2 * lam * t) / (2 * lam)
