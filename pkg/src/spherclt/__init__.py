"""Simulation and verification toolkit for the central limit theorem of
i.i.d. Brownian motions (and Ornstein-Uhlenbeck processes) on the unit sphere."""

__version__ = "0.1.0"

from .analytic import (
    ModelParams,
    g0_variance,
    gprime_variance,
    lambda_sqrt,
    mean_theta,
    q_matrix,
    second_moment,
    z_infinity_cov,
)
from .geometry import SymMatrix, UnitVector, apply_projection, normalize, projection_matrix, tangent_gram
from .simulate import Scheme, SimConfig, simulate_ou_path, simulate_sphere_path, step_sphere
from .stats import TestReport

__all__ = [
    "ModelParams",
    "Scheme",
    "SimConfig",
    "SymMatrix",
    "TestReport",
    "UnitVector",
    "apply_projection",
    "g0_variance",
    "gprime_variance",
    "lambda_sqrt",
    "mean_theta",
    "normalize",
    "projection_matrix",
    "q_matrix",
    "second_moment",
    "simulate_ou_path",
    "simulate_sphere_path",
    "step_sphere",
    "tangent_gram",
    "z_infinity_cov",
]
