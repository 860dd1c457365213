"""Points on the unit sphere and the tangent projectors ``Id - x x^T``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

UNIT_TOL = 1e-12
ZERO_NORM = 1e-300


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class UnitVector:
    """A point of S_{n-1}.

    Construction rejects vectors whose norm is off by more than ``1e-12``;
    use :func:`normalize` to project an arbitrary nonzero vector.
    """

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise InvalidInputError(f"unit vector needs a 1-d array of length >= 2, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("unit vector has non-finite coordinates")
        norm = float(np.linalg.norm(c))
        if abs(norm - 1.0) > UNIT_TOL:
            raise InvalidInputError(f"|x| = {norm!r} is not within {UNIT_TOL} of 1; call normalize() explicitly")
        object.__setattr__(self, "coords", _frozen(c))

    @property
    def n(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, UnitVector):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"UnitVector({self.coords.tolist()!r})"

    @classmethod
    def basis(cls, n: int, i: int = 0) -> "UnitVector":
        """The canonical basis vector e_{i+1} of R^n."""
        if n < 2 or not 0 <= i < n:
            raise InvalidInputError(f"no basis vector e{i + 1} in dimension {n}")
        e = np.zeros(n)
        e[i] = 1.0
        return cls(e)


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense symmetric matrix.

    Only the upper triangle of the input is read; the lower triangle is
    mirrored from it so that ``entries[i, j] == entries[j, i]`` holds
    bit-for-bit. Inputs that are visibly asymmetric are rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        if np.max(np.abs(a - a.T)) > 1e-10 * scale:
            raise InvalidInputError("matrix is not symmetric")
        upper = np.triu(a)
        object.__setattr__(self, "entries", _frozen(upper + np.triu(a, 1).T))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __matmul__(self, other):
        return self.entries @ np.asarray(other, dtype=float)

    def __repr__(self):
        return f"SymMatrix({self.entries.tolist()!r})"

    def eigh(self):
        return np.linalg.eigh(self.entries)


def _as_vector(m, n: int, name: str = "m") -> np.ndarray:
    v = np.asarray(m, dtype=float)
    if v.shape != (n,):
        raise InvalidInputError(f"{name} has shape {v.shape}, expected ({n},)")
    return v


def normalize(v) -> UnitVector:
    """Return ``v / |v|``; the zero vector is an error, never a fallback."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise InvalidInputError(f"expected a 1-d vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if not norm > ZERO_NORM:
        raise DegenerateInputError("cannot normalize a (near-)zero vector")
    u = v / norm
    # one more division keeps | |u| - 1 | at rounding level for awkward scales
    return UnitVector(u / np.linalg.norm(u))


def projection_matrix(x: UnitVector) -> SymMatrix:
    """Orthogonal projector ``Id - x x^T`` onto the tangent hyperplane at x."""
    if not isinstance(x, UnitVector):
        x = UnitVector(x)
    c = x.coords
    return SymMatrix(np.eye(x.n) - np.outer(c, c))


def apply_projection(x: UnitVector, m) -> np.ndarray:
    """``m - (m.x) x`` without building the n x n matrix."""
    c = x.coords
    m = _as_vector(m, x.n)
    return m - (m @ c) * c


def tangent_gram(x: UnitVector, m, m2) -> float:
    """Inner product of the tangent projections of m and m2 at x."""
    c = x.coords
    m = _as_vector(m, x.n)
    m2 = _as_vector(m2, x.n, "m2")
    return float(m @ m2 - (m @ c) * (m2 @ c))


def project_rows(states: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Row-wise ``v - (v.x) x`` for a block of states (shape (B, n))."""
    dots = np.einsum("ij,ij->i", vectors, states)
    return vectors - dots[:, None] * states


def orthonormal_complement(x: UnitVector) -> np.ndarray:
    """An (n-1) x n matrix whose rows span the hyperplane orthogonal to x."""
    # Householder reflection mapping x to e1; its remaining rows are the complement.
    c = x.coords
    e1 = np.zeros_like(c)
    e1[0] = 1.0
    s = 1.0 if c[0] >= 0 else -1.0
    w = c + s * e1
    h = np.eye(x.n) - 2.0 * np.outer(w, w) / (w @ w)
    return h[1:]
