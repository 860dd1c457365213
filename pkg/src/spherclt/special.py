"""Real-argument Gamma, Beta and Gauss hypergeometric functions.

Only the parameter regimes needed by the variance closed forms are covered:
Gamma and Beta at negative non-integer arguments (analytic continuation) and
2F1 on ``-1 <= z <= 1``.
"""

from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 10000


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    """sin(pi x) with the argument reduced first, so sin(pi k) is exactly 0."""
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def signed_log_gamma(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))``.

    Positive arguments go straight to the C library's ``lgamma``; negative
    ones use the reflection formula ``Gamma(x) Gamma(1-x) = pi / sin(pi x)``
    with the sign carried by ``sin(pi x)`` since ``Gamma(1-x) > 0`` there.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("log_gamma of NaN")
    if _is_pole(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    if x > 0:
        return math.lgamma(x), 1
    s = _sinpi(x)
    return math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - x), (1 if s > 0 else -1)


def log_gamma(x: float) -> float:
    """``log|Gamma(x)|``."""
    return signed_log_gamma(x)[0]


def gamma_sign(x: float) -> int:
    return signed_log_gamma(x)[1]


def gamma(x: float) -> float:
    lg, sign = signed_log_gamma(x)
    return sign * math.exp(lg)


def beta_continued(a: float, b: float) -> float:
    """Beta(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), continued to negative a, b.

    For ``a, b > 0`` this is the Euler integral of ``u^(a-1) (1-u)^(b-1)``;
    elsewhere it is the analytic continuation of that integral.
    """
    for v, label in ((a, "a"), (b, "b"), (a + b, "a+b")):
        if _is_pole(v):
            raise DomainError(f"Beta({a!r}, {b!r}): {label} = {v!r} is a Gamma pole")
    la, sa = signed_log_gamma(a)
    lb, sb = signed_log_gamma(b)
    lab, sab = signed_log_gamma(a + b)
    return sa * sb * sab * math.exp(la + lb - lab)


def _series(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    small = 0
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if term == 0.0:
            return total
        # two consecutive tiny terms guard against a near-zero Pochhammer factor
        if abs(term) < SERIES_RTOL * abs(total):
            small += 1
            if small == 2:
                return total
        else:
            small = 0
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) series did not converge in {SERIES_MAX_TERMS} terms",
        estimate=total,
        error_estimate=abs(term),
    )


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real ``-1 <= z <= 1``.

    Summed as a power series. For ``z < -1/2`` the Pfaff transformation

        2F1(a, b; c; z) = (1 - z)^(-a) 2F1(a, c - b; c; z / (z - 1))

    maps the argument into ``[1/3, 1/2)`` first, which is what makes the
    ``z = -1`` endpoint usable. ``z = 1`` is accepted only when
    ``c - a - b > 0`` and is evaluated through Gauss's summation theorem.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_pole(c):
        raise DomainError(f"2F1 undefined for c = {c!r} (non-positive integer)")
    if not -1.0 <= z <= 1.0:
        raise DomainError(f"2F1 series only supported for |z| <= 1, got z = {z!r}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if z == 1.0:
        if c - a - b <= 0:
            raise DomainError("2F1 diverges at z = 1 unless c - a - b > 0")
        num = signed_log_gamma(c), signed_log_gamma(c - a - b)
        den = signed_log_gamma(c - a), signed_log_gamma(c - b)
        sign = num[0][1] * num[1][1] * den[0][1] * den[1][1]
        return sign * math.exp(num[0][0] + num[1][0] - den[0][0] - den[1][0])
    if z < -0.5:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _series(a, c - b, c, w)
    return _series(a, b, c, z)
