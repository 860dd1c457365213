"""Adaptive quadrature with an error-budget contract.

Backed by QUADPACK (``scipy.integrate.quad``): Gauss-Kronrod 21-point
subdivision with epsilon extrapolation, which copes with integrable endpoint
singularities, and an internal ``x = lo + (1 - v)/v`` map for an infinite
upper limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from scipy import integrate

from .errors import ConvergenceError, InvalidInputError

DEFAULT_LIMIT = 500


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def quadrature(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    *,
    rtol: float = 0.0,
    limit: int = DEFAULT_LIMIT,
) -> QuadratureResult:
    """Integrate ``f`` over ``[lo, hi]`` to absolute error ``tol``.

    ``hi`` may be ``math.inf``. Raises :class:`ConvergenceError` carrying the
    best estimate if the subdivision budget runs out first.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    if math.isnan(lo) or math.isnan(hi) or math.isinf(lo):
        raise InvalidInputError(f"bad integration limits ({lo}, {hi})")
    if hi < lo:
        raise InvalidInputError("hi must be >= lo")
    if hi == lo:
        return QuadratureResult(0.0, 0.0, 0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, lo, hi, epsabs=tol, epsrel=rtol, limit=limit, full_output=1)
    value, err, info = out[0], out[1], out[2]
    neval = int(info.get("neval", 0))
    if not (math.isfinite(value) and err <= max(tol, rtol * abs(value))):
        raise ConvergenceError(
            f"quadrature on [{lo}, {hi}] stopped at error {err:.3g} > tol {tol:.3g}",
            estimate=value,
            error_estimate=err,
        )
    return QuadratureResult(float(value), float(err), neval)
