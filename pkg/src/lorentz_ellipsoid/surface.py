"""Geometry of the ellipsoid x^2/a + y^2/b + z^2/c = 1 inside Minkowski space.

The induced metric is Lorentz in the equatorial belt, Riemannian in the polar
caps and degenerate on the two tropics, where the degeneracy function

    D(p) = x^2/a^2 + y^2/b^2 - z^2/c^2

vanishes.  D is also the Minkowski square of the normal N = (x/a, y/b, -z/c).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .mink_core import METRIC, MinkVec3, as_vec, mink_cross, mink_dot

ON_SURFACE_TOL = 1e-9
TROPIC_BAND = 1e-8


class TropicError(ValueError):
    """Raised when a quantity is singular on (or inside the band around) a tropic."""


@dataclass(frozen=True)
class EllipsoidShape:
    """Squared semi-axes (a, b, c); a > b is the general position condition."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.a > self.b:
            raise ValueError(f"general position requires a > b, got a={self.a}, b={self.b}")

    @classmethod
    def parse(cls, text: str) -> "EllipsoidShape":
        a, b, c = (float(v) for v in text.split(","))
        return cls(a, b, c)

    @property
    def diag(self) -> np.ndarray:
        """The diagonal (1/a, 1/b, 1/c) of the quadratic form A."""
        return np.array([1.0 / self.a, 1.0 / self.b, 1.0 / self.c])

    def equator_point(self, t: float) -> np.ndarray:
        return np.array([math.sqrt(self.a) * math.cos(t), math.sqrt(self.b) * math.sin(t), 0.0])

    def embed(self, theta, phi) -> np.ndarray:
        """Point at latitude-like angle *theta* and longitude *phi*."""
        return np.array([
            math.sqrt(self.a) * np.cos(theta) * np.cos(phi),
            math.sqrt(self.b) * np.cos(theta) * np.sin(phi),
            math.sqrt(self.c) * np.sin(theta),
        ])

    def tropic_latitude(self, phi: float) -> float:
        """Latitude of the Northern tropic above longitude *phi*."""
        s = math.cos(phi) ** 2 / self.a + math.sin(phi) ** 2 / self.b
        # D = cos^2(th) s - sin^2(th)/c = 0
        return math.atan(math.sqrt(self.c * s))


class Region(enum.Enum):
    NORTH_CAP = "NorthCap"
    SOUTH_CAP = "SouthCap"
    BELT = "Belt"
    NORTH_TROPIC = "NorthTropic"
    SOUTH_TROPIC = "SouthTropic"


@dataclass(frozen=True)
class SurfacePoint:
    p: MinkVec3
    region: Region

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.p, dtype=dtype)


def _xyz(p) -> np.ndarray:
    if isinstance(p, SurfacePoint):
        return p.p.as_array()
    return as_vec(p)


def quadric_residual(shape: EllipsoidShape, p) -> float:
    x = _xyz(p)
    return float(x @ (shape.diag * x) - 1.0)


def degeneracy(shape: EllipsoidShape, p) -> float:
    """D(p) = x^2/a^2 + y^2/b^2 - z^2/c^2; positive in the belt, negative in the caps."""
    x, y, z = _xyz(p)
    return x * x / shape.a**2 + y * y / shape.b**2 - z * z / shape.c**2


def degeneracy_gradient(shape: EllipsoidShape, p) -> np.ndarray:
    x, y, z = _xyz(p)
    return np.array([2 * x / shape.a**2, 2 * y / shape.b**2, -2 * z / shape.c**2])


def classify(shape: EllipsoidShape, p) -> Region:
    d = degeneracy(shape, p)
    north = _xyz(p)[2] >= 0
    if abs(d) < TROPIC_BAND:
        return Region.NORTH_TROPIC if north else Region.SOUTH_TROPIC
    if d > 0:
        return Region.BELT
    return Region.NORTH_CAP if north else Region.SOUTH_CAP


def surface_point(shape: EllipsoidShape, p, project: bool = False) -> SurfacePoint:
    """Validate (or, with *project*, first project) *p* and tag its region."""
    x = _xyz(p)
    if project:
        x = project_to_surface(shape, x)
    res = quadric_residual(shape, x)
    if abs(res) > ON_SURFACE_TOL:
        raise ValueError(f"point {x} is off the ellipsoid (residual {res:.3e})")
    return SurfacePoint(MinkVec3.from_array(x), classify(shape, x))


def project_to_surface(shape: EllipsoidShape, p, iterations: int = 50) -> np.ndarray:
    """Newton projection onto the quadric along the Euclidean gradient.

    Stops early once the residual is at round-off level; *iterations* caps the
    number of Newton steps.
    """
    x = _xyz(p).copy()
    d = shape.diag
    for _ in range(iterations):
        res = x @ (d * x) - 1.0
        if abs(res) <= 4.0 * np.finfo(float).eps:
            break
        g = 2.0 * d * x
        x -= res / (g @ g) * g
    return x


def project_to_tangent(shape: EllipsoidShape, p, v) -> np.ndarray:
    """Euclidean-orthogonal projection of *v* onto the tangent plane at *p*."""
    g = shape.diag * _xyz(p)
    v = as_vec(v)
    return v - (g @ v) / (g @ g) * g


def normal(shape: EllipsoidShape, p) -> np.ndarray:
    """Minkowski normal N = (x/a, y/b, -z/c); its Minkowski square is D(p)."""
    return shape.diag * _xyz(p) * METRIC


def tangent_frame(shape: EllipsoidShape, p) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean-orthogonal tangent pair (h, m).

    h = (-y/b, x/a, 0) is horizontal and points east (counterclockwise about z);
    m is the Euclidean normal crossed with h and always has m_z > 0 (north).
    They are also Minkowski-orthogonal, with <h,h> = S and <m,m> = -S D where
    S = x^2/a^2 + y^2/b^2.
    """
    x, y, z = _xyz(p)
    a, b, c = shape.a, shape.b, shape.c
    h = np.array([-y / b, x / a, 0.0])
    m = np.array([-z * x / (a * c), -z * y / (b * c), x * x / (a * a) + y * y / (b * b)])
    return h, m


def null_directions(shape: EllipsoidShape, p) -> tuple[np.ndarray, np.ndarray]:
    """The (right, left) null tangent directions at a belt or tropic point.

    Both are unit Euclidean vectors oriented north.  The right one moves east
    while climbing, the left one west; on a tropic they merge.
    """
    d = degeneracy(shape, p)
    if d < -TROPIC_BAND:
        raise ValueError("no real null directions in a polar cap")
    h, m = tangent_frame(shape, p)
    root = math.sqrt(max(d, 0.0))
    right = root * h + m
    left = -root * h + m
    return right / np.linalg.norm(right), left / np.linalg.norm(left)


def null_direction_side(shape: EllipsoidShape, p, v) -> int:
    """+1 if *v* lies along the right null field, -1 if along the left one."""
    h, m = tangent_frame(shape, p)
    return 1 if (v @ h) * (v @ m) > 0 else -1


def quadratic_energy(shape: EllipsoidShape, v) -> float:
    """u^2/a + v^2/b + w^2/c, the second factor of the Joachimsthal integral."""
    v = as_vec(v)
    return float(v @ (shape.diag * v))


def joachimsthal(shape: EllipsoidShape, p, v) -> float:
    """J = D(p) (u^2/a + v^2/b + w^2/c), conserved along geodesics."""
    return degeneracy(shape, p) * quadratic_energy(shape, v)


def gauss_curvature(shape: EllipsoidShape, p) -> float:
    """K = -1 / (abc D(p)^2), negative everywhere off the tropics."""
    d = degeneracy(shape, p)
    if abs(d) < TROPIC_BAND:
        raise TropicError("Gauss curvature tends to -infinity on the tropics")
    return -1.0 / (shape.a * shape.b * shape.c * d * d)


def equivalent_metric_energy(shape: EllipsoidShape, p, v) -> float:
    """Squared length of *v* in the geodesically equivalent Riemannian metric."""
    d = degeneracy(shape, p)
    if abs(d) < TROPIC_BAND:
        raise TropicError("the equivalent Riemannian metric is singular on the tropics")
    return quadratic_energy(shape, v) / abs(d)


def gauss_curvature_fd(shape: EllipsoidShape, theta: float, phi: float,
                       step: float = 1e-5, second_step: float = 1e-4) -> float:
    """Finite-difference Gauss curvature at the point with angles (theta, phi).

    Uses the second fundamental form with respect to a Minkowski unit normal
    built from the numerically differentiated embedding; it shares nothing with
    the closed formula of :func:`gauss_curvature`.  Second derivatives use the
    coarser *second_step* to keep round-off below 1e-7.
    """
    X = shape.embed
    h, k = step, second_step
    x_t = (X(theta + h, phi) - X(theta - h, phi)) / (2 * h)
    x_p = (X(theta, phi + h) - X(theta, phi - h)) / (2 * h)
    x0 = X(theta, phi)
    x_tt = (X(theta + k, phi) - 2 * x0 + X(theta - k, phi)) / k**2
    x_pp = (X(theta, phi + k) - 2 * x0 + X(theta, phi - k)) / k**2
    x_tp = (X(theta + k, phi + k) - X(theta + k, phi - k)
            - X(theta - k, phi + k) + X(theta - k, phi - k)) / (4 * k * k)
    n = mink_cross(x_t, x_p)
    nn = mink_dot(n, n)
    if nn == 0.0:
        raise TropicError("degenerate normal")
    eps = math.copysign(1.0, nn)
    u = n / math.sqrt(abs(nn))
    first = np.array([[mink_dot(x_t, x_t), mink_dot(x_t, x_p)],
                      [mink_dot(x_t, x_p), mink_dot(x_p, x_p)]])
    second = np.array([[mink_dot(x_tt, u), mink_dot(x_tp, u)],
                       [mink_dot(x_tp, u), mink_dot(x_pp, u)]])
    return eps * np.linalg.det(second) / np.linalg.det(first)


def random_surface_points(shape: EllipsoidShape, rng: np.random.Generator, n: int,
                          region: str = "any", margin: float = 1e-3) -> np.ndarray:
    """Sample *n* surface points; *region* is 'any', 'belt', 'cap' or 'offtropic'.

    Points with |D| < margin are rejected unless *region* is 'any'.
    """
    out = []
    while len(out) < n:
        theta = math.asin(rng.uniform(-1.0, 1.0))
        phi = rng.uniform(0.0, 2 * math.pi)
        p = shape.embed(theta, phi)
        d = degeneracy(shape, p)
        if region != "any" and abs(d) < margin:
            continue
        if region == "belt" and d <= 0 or region == "cap" and d >= 0:
            continue
        out.append(p)
    return np.array(out)
