"""Minkowski 3-space with signature (+, +, -).

Every other module builds on the inner product defined here.  Functions accept
either :class:`MinkVec3` instances or any length-3 array-like.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

#: Relative band (w.r.t. the squared Euclidean norm) inside which a vector is light-like.
NULL_TOLERANCE = 1e-10

METRIC = np.array([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class MinkVec3:
    """A point or vector of Minkowski 3-space."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"MinkVec3.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, v) -> "MinkVec3":
        x, y, z = np.asarray(v, dtype=float).reshape(3)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


class CausalClass(enum.Enum):
    SPACE_LIKE = "SpaceLike"
    TIME_LIKE = "TimeLike"
    LIGHT_LIKE = "LightLike"


def as_vec(v) -> np.ndarray:
    """Coerce *v* to a float array of shape (3,)."""
    return np.asarray(v, dtype=float).reshape(3)


def mink_dot(p, q) -> float:
    """Inner product ``p.x q.x + p.y q.y - p.z q.z``."""
    p = as_vec(p)
    q = as_vec(q)
    return float(p[0] * q[0] + p[1] * q[1] - p[2] * q[2])


def mink_norm2(v) -> float:
    """Minkowski squared length (the energy of a velocity vector)."""
    return mink_dot(v, v)


def mink_cross(p, q) -> np.ndarray:
    """Vector Minkowski-orthogonal to both *p* and *q*.

    The Euclidean cross product gives the Euclidean normal; flipping the sign of
    its last component turns it into the Minkowski normal.
    """
    n = np.cross(as_vec(p), as_vec(q))
    return n * METRIC


def causal_class(v) -> CausalClass:
    v = as_vec(v)
    scale = float(v @ v)
    if scale == 0.0:
        raise ValueError("causal class of the zero vector is undefined")
    e = mink_norm2(v)
    band = NULL_TOLERANCE * scale
    if e > band:
        return CausalClass.SPACE_LIKE
    if e < -band:
        return CausalClass.TIME_LIKE
    return CausalClass.LIGHT_LIKE
