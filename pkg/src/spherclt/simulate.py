"""Discretized trajectories on the sphere and in R^n.

Sphere paths solve ``dTheta = P(Theta) dB - c Theta dt`` with
``c = (n-1)/2 + lam``. Two schemes are provided:

* ``projected-euler``: Euler-Maruyama step followed by renormalization;
* ``tangent-euler``: move along the great circle of the tangent increment.

Euclidean paths solve the OU equation ``dZ = dB - lam Z dt`` either by
Euler-Maruyama or by the exact Gaussian transition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import ModelParams, ou_time_change, sphere_drift_rate
from .errors import DomainError, InvalidInputError, StepFailureError
from .geometry import UnitVector, project_rows
from .rng import BLOCK_SIZE, Stream, block_generator, block_slices, ordered_map

__all__ = [
    "Scheme",
    "SimConfig",
    "SpherePath",
    "EuclideanPath",
    "AngleSeries",
    "SphereEnsemble",
    "OUEnsemble",
    "step_sphere",
    "simulate_sphere_path",
    "simulate_ou_path",
    "simulate_sphere_ensemble",
    "simulate_ou_ensemble",
    "angular_statistics",
    "ou_time_change",
    "time_grid",
    "grid_indices",
]

MIN_CANDIDATE_NORM = 1e-8
ORIGIN_TOL = 1e-8
MAX_STEPS = 10**9
GRID_TOL = 1e-9


class Scheme(str, enum.Enum):
    PROJECTED_EULER = "projected-euler"
    TANGENT_EULER = "tangent-euler"
    EULER_MARUYAMA = "euler-maruyama"
    EXACT = "exact"


SPHERE_SCHEMES = (Scheme.PROJECTED_EULER, Scheme.TANGENT_EULER)
OU_SCHEMES = (Scheme.EULER_MARUYAMA, Scheme.EXACT)


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    dt: float = 1e-3
    t_max: float = 1.0
    scheme: Scheme = Scheme.PROJECTED_EULER
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise InvalidInputError(f"t_max must be positive, got {self.t_max!r}")
        if self.dt > self.t_max:
            raise InvalidInputError("dt must not exceed t_max")
        if self.t_max / self.dt > MAX_STEPS:
            raise InvalidInputError(f"t_max/dt exceeds the {MAX_STEPS} step budget")
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", seed)

    @property
    def n(self) -> int:
        return self.params.n

    def with_(self, **changes) -> "SimConfig":
        d = dict(params=self.params, dt=self.dt, t_max=self.t_max, scheme=self.scheme, seed=self.seed)
        d.update(changes)
        return SimConfig(**d)


def time_grid(dt: float, t_max: float) -> np.ndarray:
    """``0, dt, 2dt, ...`` ending exactly at ``t_max`` (last step may be shorter)."""
    steps = max(1, math.ceil(t_max / dt - GRID_TOL))
    times = np.arange(steps + 1, dtype=float) * dt
    times[-1] = t_max
    return times


def grid_indices(times: np.ndarray, eval_times) -> np.ndarray:
    """Positions of ``eval_times`` on the grid; off-grid times are an error."""
    idx = []
    for t in np.atleast_1d(np.asarray(eval_times, dtype=float)):
        k = int(np.searchsorted(times, t - GRID_TOL * max(1.0, abs(t))))
        if k >= times.size or abs(times[k] - t) > GRID_TOL * max(1.0, abs(t)):
            raise InvalidInputError(f"evaluation time {t!r} is not on the simulation grid")
        idx.append(k)
    return np.asarray(idx, dtype=int)


# -- single steps -------------------------------------------------------------


def _advance_sphere(x: np.ndarray, dw: np.ndarray, drift_dt: float, scheme: Scheme) -> np.ndarray:
    """One step for a block of states ``x`` (B, n) given increments ``dw``."""
    tangent = project_rows(x, dw)
    if scheme is Scheme.PROJECTED_EULER:
        cand = x * (1.0 - drift_dt) + tangent
    elif scheme is Scheme.TANGENT_EULER:
        # the drift is radial, so on the sphere only the tangent increment moves the point
        ang = np.sqrt(np.einsum("ij,ij->i", tangent, tangent))
        cand = x * np.cos(ang)[:, None] + tangent * np.sinc(ang / np.pi)[:, None]
    else:
        raise InvalidInputError(f"{scheme.value} is not a sphere scheme")
    norms = np.sqrt(np.einsum("ij,ij->i", cand, cand))
    if norms.min() < MIN_CANDIDATE_NORM:
        raise StepFailureError(f"step left the sphere degenerate (|candidate| = {norms.min():.3g}); reduce dt")
    return cand / norms[:, None]


def step_sphere(
    state: UnitVector,
    dt: float,
    noise,
    drift_rate: float,
    scheme: Scheme = Scheme.PROJECTED_EULER,
) -> UnitVector:
    """Advance one state by one step.

    ``noise`` is the Brownian increment, already scaled by ``sqrt(dt)``.
    """
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (state.n,):
        raise InvalidInputError(f"noise has shape {noise.shape}, expected ({state.n},)")
    x = _advance_sphere(state.coords[None, :], noise[None, :], drift_rate * dt, Scheme(scheme))
    return UnitVector(x[0])


# -- single paths -------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_csv(fh, times, states):
    n = states.shape[1]
    fh.write(",".join(["t"] + [f"x{i + 1}" for i in range(n)]) + "\n")
    for t, row in zip(times, states):
        fh.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")


@dataclass(frozen=True, eq=False)
class SpherePath:
    times: np.ndarray
    states: np.ndarray  # (steps + 1, n), every row a unit vector
    config: SimConfig

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> UnitVector:
        return UnitVector(self.states[k])

    def to_csv(self, fh) -> None:
        """Write ``t,x1,...,xn`` rows with 17 significant digits."""
        _write_csv(fh, self.times, self.states)


@dataclass(frozen=True, eq=False)
class EuclideanPath:
    times: np.ndarray
    states: np.ndarray
    config: SimConfig

    def __len__(self):
        return self.times.size

    def to_csv(self, fh) -> None:
        _write_csv(fh, self.times, self.states)


def simulate_sphere_path(cfg: SimConfig, rng: np.random.Generator, drift_rate: float | None = None) -> SpherePath:
    """One path started at ``theta0``.

    ``drift_rate`` defaults to ``(n-1)/2 + lam``. The rng is consumed one
    ``standard_normal(n)`` draw per step, so a path is reproducible from
    ``(seed, scheme, dt)``.
    """
    if cfg.scheme not in SPHERE_SCHEMES:
        raise InvalidInputError(f"{cfg.scheme.value} is not a sphere scheme")
    c = sphere_drift_rate(cfg.params) if drift_rate is None else float(drift_rate)
    times = time_grid(cfg.dt, cfg.t_max)
    states = np.empty((times.size, cfg.n))
    x = cfg.params.theta0.coords[None, :].copy()
    states[0] = x[0]
    for k, h in enumerate(np.diff(times)):
        dw = math.sqrt(h) * rng.standard_normal((1, cfg.n))
        x = _advance_sphere(x, dw, c * h, cfg.scheme)
        states[k + 1] = x[0]
    return SpherePath(times, states, cfg)


def _ou_step(z, gauss, h, lam, scheme):
    if scheme is Scheme.EXACT:
        if lam == 0:
            return z + math.sqrt(h) * gauss
        return z * math.exp(-lam * h) + math.sqrt(-math.expm1(-2 * lam * h) / (2 * lam)) * gauss
    return z + math.sqrt(h) * gauss - lam * h * z


def simulate_ou_path(cfg: SimConfig, rng: np.random.Generator) -> EuclideanPath:
    """Euclidean OU path from ``radius * theta0``.

    ``Scheme.EXACT`` samples the Gaussian transition; ``Scheme.EULER_MARUYAMA``
    is the plain Euler step.
    """
    if cfg.scheme not in OU_SCHEMES:
        raise InvalidInputError(f"{cfg.scheme.value} is not an OU scheme")
    times = time_grid(cfg.dt, cfg.t_max)
    states = np.empty((times.size, cfg.n))
    z = cfg.params.z0.copy()
    states[0] = z
    for k, h in enumerate(np.diff(times)):
        z = _ou_step(z, rng.standard_normal(cfg.n), h, cfg.params.lam, cfg.scheme)
        states[k + 1] = z
    return EuclideanPath(times, states, cfg)


# -- angles (n = 2) ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AngleSeries:
    times: np.ndarray
    angles: np.ndarray
    large_jumps: int = 0  # steps whose rotation reached pi/2

    @property
    def warning(self) -> str | None:
        if self.large_jumps:
            return f"{self.large_jumps} step(s) rotated by >= pi/2; unwrapping may be wrong"
        return None


def _angle_increment(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    cross = prev[..., 0] * cur[..., 1] - prev[..., 1] * cur[..., 0]
    dot = prev[..., 0] * cur[..., 0] + prev[..., 1] * cur[..., 1]
    return np.arctan2(cross, dot)


def angular_statistics(path: SpherePath | EuclideanPath) -> AngleSeries:
    """Continuous (lifted) polar angle of a planar path."""
    states = np.asarray(path.states, dtype=float)
    if states.shape[1] != 2:
        raise InvalidInputError("angular statistics need n = 2")
    radii = np.hypot(states[:, 0], states[:, 1])
    if radii.min() < ORIGIN_TOL:
        raise DomainError("path passes within 1e-8 of the origin; the angle is undefined there")
    inc = _angle_increment(states[:-1], states[1:])
    angles = np.empty(states.shape[0])
    angles[0] = math.atan2(states[0, 1], states[0, 0])
    angles[1:] = angles[0] + np.cumsum(inc)
    return AngleSeries(np.asarray(path.times), angles, int(np.count_nonzero(np.abs(inc) >= np.pi / 2)))


# -- ensembles ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphereEnsemble:
    """States of K paths at the requested times, shape (T, K, n)."""

    times: np.ndarray
    states: np.ndarray
    config: SimConfig
    drift_rate: float


@dataclass(frozen=True, eq=False)
class OUEnsemble:
    times: np.ndarray
    states: np.ndarray  # (T, K, n)
    angles: np.ndarray | None  # lifted angles (T, K) when n = 2
    config: SimConfig
    large_jumps: int = 0
    min_radius: float = field(default=math.inf)


def _noise(gen: np.random.Generator, n: int, size: int, identical: bool) -> np.ndarray:
    if identical:
        return np.broadcast_to(gen.standard_normal((1, n)), (size, n))
    return gen.standard_normal((BLOCK_SIZE, n))[:size]


def simulate_sphere_ensemble(
    cfg: SimConfig,
    K: int,
    eval_times,
    *,
    drift_rate: float | None = None,
    threads=1,
    stream: int = Stream.SPHERE,
    identical: bool = False,
) -> SphereEnsemble:
    """K independent sphere paths, recorded at ``eval_times``.

    With ``identical=True`` every path reuses the same noise (a degenerate
    mode for checking accumulation algebra).
    """
    if cfg.scheme not in SPHERE_SCHEMES:
        raise InvalidInputError(f"{cfg.scheme.value} is not a sphere scheme")
    K = int(K)
    if K < 1:
        raise InvalidInputError("K must be >= 1")
    c = sphere_drift_rate(cfg.params) if drift_rate is None else float(drift_rate)
    grid = time_grid(cfg.dt, cfg.t_max)
    rec = grid_indices(grid, eval_times)
    steps = np.diff(grid)
    n = cfg.n
    theta0 = cfg.params.theta0.coords

    def run(block):
        b, lo, hi = block
        size = hi - lo
        gen = block_generator(cfg.seed, stream, 0 if identical else b)
        out = np.empty((rec.size, size, n))
        x = np.tile(theta0, (size, 1))
        for r in np.flatnonzero(rec == 0):
            out[r] = x
        for k, h in enumerate(steps):
            dw = math.sqrt(h) * _noise(gen, n, size, identical)
            x = _advance_sphere(x, dw, c * h, cfg.scheme)
            for r in np.flatnonzero(rec == k + 1):
                out[r] = x
        return out

    parts = ordered_map(run, block_slices(K), threads)
    return SphereEnsemble(grid[rec], np.concatenate(parts, axis=1), cfg, c)


def simulate_ou_ensemble(
    cfg: SimConfig,
    K: int,
    eval_times,
    *,
    threads=1,
    stream: int = Stream.OU,
    track_angle: bool | None = None,
) -> OUEnsemble:
    """K Euclidean OU paths; for n = 2 the lifted angle is tracked step by step."""
    if cfg.scheme not in OU_SCHEMES:
        raise InvalidInputError(f"{cfg.scheme.value} is not an OU scheme")
    K = int(K)
    if K < 1:
        raise InvalidInputError("K must be >= 1")
    n = cfg.n
    track = (n == 2) if track_angle is None else bool(track_angle)
    if track and n != 2:
        raise InvalidInputError("angle tracking needs n = 2")
    grid = time_grid(cfg.dt, cfg.t_max)
    rec = grid_indices(grid, eval_times)
    steps = np.diff(grid)
    z0 = cfg.params.z0
    lam = cfg.params.lam

    def run(block):
        b, lo, hi = block
        size = hi - lo
        gen = block_generator(cfg.seed, stream, b)
        out = np.empty((rec.size, size, n))
        ang_out = np.empty((rec.size, size)) if track else None
        z = np.tile(z0, (size, 1))
        ang = np.full(size, math.atan2(z0[1], z0[0])) if track else None
        jumps = 0
        rmin = float(np.hypot(z0[0], z0[1])) if track else math.inf
        for r in np.flatnonzero(rec == 0):
            out[r] = z
            if track:
                ang_out[r] = ang
        for k, h in enumerate(steps):
            znew = _ou_step(z, gen.standard_normal((BLOCK_SIZE, n))[:size], h, lam, cfg.scheme)
            if track:
                rmin = min(rmin, float(np.min(np.hypot(znew[:, 0], znew[:, 1]))))
                inc = _angle_increment(z, znew)
                jumps += int(np.count_nonzero(np.abs(inc) >= np.pi / 2))
                ang = ang + inc
            z = znew
            for r in np.flatnonzero(rec == k + 1):
                out[r] = z
                if track:
                    ang_out[r] = ang
        return out, ang_out, jumps, rmin

    parts = ordered_map(run, block_slices(K), threads)
    states = np.concatenate([p[0] for p in parts], axis=1)
    angles = np.concatenate([p[1] for p in parts], axis=1) if track else None
    rmin = min(p[3] for p in parts)
    if track and rmin < ORIGIN_TOL:
        raise DomainError("an OU path came within 1e-8 of the origin; its angle is undefined")
    return OUEnsemble(grid[rec], states, angles, cfg, sum(p[2] for p in parts), rmin)
