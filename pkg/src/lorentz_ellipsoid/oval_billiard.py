"""Null-direction circle maps on plane ovals.

Each direction u defines an involution of an oval: the line through a
boundary point with direction u meets the oval again at exactly one point.
Composing the involutions of two directions gives an orientation preserving
circle map T_(u,v).  For an ellipse it is conjugate to a rotation; in the
angle parameter of a circle it is the rotation by twice the angle from u to v.

The module also carries the folded null billiard that the ellipsoid map T
tends to as b -> 0 (see :func:`folded_null_billiard_map`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi
MIN_SPLINE_SAMPLES = 512
TANGENCY_TOL = 1e-12

CurveFn = Callable[[np.ndarray], np.ndarray]


def _perp(d) -> np.ndarray:
    return np.array([-d[1], d[0]])


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0 or not np.isfinite(n):
        raise ValueError("direction must be a nonzero finite vector")
    return v / n


def direction(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


class Oval:
    """A closed strictly convex curve t -> gamma(t), t in [0, 2 pi), counterclockwise.

    *curve* and *derivative* map an array of parameters to an array of shape
    (len(t), 2).
    """

    def __init__(self, curve: CurveFn, derivative: CurveFn, name: str = "oval", check: bool = True,
                 scalar: Callable[[float], tuple] | None = None):
        self._curve = curve
        self._derivative = derivative
        self._scalar = scalar
        self.name = name
        self._extremes: dict = {}
        if check and not self.is_strictly_convex():
            raise ValueError(f"{name} is not a strictly convex counterclockwise curve")

    def point(self, t):
        out = self._curve(np.atleast_1d(np.asarray(t, dtype=float)))
        return out[0] if np.ndim(t) == 0 else out

    def tangent(self, t):
        out = self._derivative(np.atleast_1d(np.asarray(t, dtype=float)))
        return out[0] if np.ndim(t) == 0 else out

    def height(self, t: float, n) -> float:
        """n . gamma(t) for a scalar t; the hot path of the chord maps."""
        if self._scalar is not None:
            x, z = self._scalar(t)
            return n[0] * x + n[1] * z
        return float(self._curve(np.array([t]))[0] @ n)

    def is_strictly_convex(self, samples: int = 4096) -> bool:
        """Cross products of successive edge vectors all positive."""
        p = self.point(np.linspace(0.0, TWO_PI, samples, endpoint=False))
        e = np.roll(p, -1, axis=0) - p
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        return bool(np.all(cross > 0))

    # -- constructors ----------------------------------------------------

    @classmethod
    def ellipse(cls, a: float, c: float) -> "Oval":
        """x^2/a + z^2/c = 1 parameterized as (sqrt(a) cos t, sqrt(c) sin t)."""
        if a <= 0 or c <= 0:
            raise ValueError("ellipse needs positive a and c")
        ra, rc = math.sqrt(a), math.sqrt(c)
        return cls(lambda t: np.column_stack([ra * np.cos(t), rc * np.sin(t)]),
                   lambda t: np.column_stack([-ra * np.sin(t), rc * np.cos(t)]),
                   name=f"ellipse({a:g},{c:g})",
                   scalar=lambda t: (ra * math.cos(t), rc * math.sin(t)))

    @classmethod
    def circle(cls) -> "Oval":
        return cls.ellipse(1.0, 1.0)

    @classmethod
    def perturbed_ellipse(cls, a: float, c: float, eps: float, k: int = 4) -> "Oval":
        """The ellipse scaled radially by 1 + eps cos(k t)."""
        ra, rc = math.sqrt(a), math.sqrt(c)

        def curve(t):
            r = 1.0 + eps * np.cos(k * t)
            return np.column_stack([ra * r * np.cos(t), rc * r * np.sin(t)])

        def derivative(t):
            r = 1.0 + eps * np.cos(k * t)
            dr = -eps * k * np.sin(k * t)
            return np.column_stack([ra * (dr * np.cos(t) - r * np.sin(t)),
                                    rc * (dr * np.sin(t) + r * np.cos(t))])

        def scalar(t):
            r = 1.0 + eps * math.cos(k * t)
            return ra * r * math.cos(t), rc * r * math.sin(t)

        return cls(curve, derivative, name=f"ellipse({a:g},{c:g})+{eps:g}cos{k}t", scalar=scalar)

    @classmethod
    def from_samples(cls, points) -> "Oval":
        """Periodic cubic spline through equally spaced samples of a closed curve."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("samples must have shape (n, 2)")
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < MIN_SPLINE_SAMPLES:
            raise ValueError(f"need at least {MIN_SPLINE_SAMPLES} samples, got {len(pts)}")
        t = np.linspace(0.0, TWO_PI, len(pts) + 1)
        spline = CubicSpline(t, np.vstack([pts, pts[:1]]), bc_type="periodic", axis=0)
        d = spline.derivative()
        return cls(lambda s: spline(np.mod(s, TWO_PI)), lambda s: d(np.mod(s, TWO_PI)), name="spline")

    def affine_image(self, matrix, offset=(0.0, 0.0)) -> "Oval":
        m = np.asarray(matrix, dtype=float)
        off = np.asarray(offset, dtype=float)
        if np.linalg.det(m) <= 0:
            raise ValueError("affine map must preserve orientation")
        return Oval(lambda t: self._curve(t) @ m.T + off, lambda t: self._derivative(t) @ m.T,
                    name=f"affine({self.name})")

    # -- support structure ----------------------------------------------

    def extremes(self, d) -> tuple[float, float]:
        """Parameters where the height along the normal of *d* is minimal and maximal."""
        d = unit(d)
        key = (round(float(d[0]), 15), round(float(d[1]), 15))
        if key in self._extremes:
            return self._extremes[key]
        n = _perp(d)
        grid = np.linspace(0.0, TWO_PI, 1025)
        slope = self.tangent(grid) @ n
        found = {}
        for i in range(len(grid) - 1):
            s0, s1 = slope[i], slope[i + 1]
            if s0 == 0.0:
                root = grid[i]
            elif s0 * s1 < 0:
                root = brentq(lambda s: float(self.tangent(s) @ n), grid[i], grid[i + 1], xtol=1e-15)
            else:
                continue
            kind = "min" if s0 < s1 else "max"
            found.setdefault(kind, root % TWO_PI)
        if set(found) != {"min", "max"}:
            raise ValueError("could not locate the support points; is the oval strictly convex?")
        self._extremes[key] = (found["min"], found["max"])
        return self._extremes[key]


@dataclass(frozen=True)
class DirectionPair:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u, v = unit(self.u), unit(self.v)
        if abs(u[0] * v[1] - u[1] * v[0]) < 1e-12:
            raise ValueError("directions must not be parallel")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_angles(cls, theta_u: float, theta_v: float) -> "DirectionPair":
        return cls(direction(theta_u), direction(theta_v))

    @classmethod
    def null(cls) -> "DirectionPair":
        """The null directions of the Lorentz plane, slopes +1 and -1."""
        return cls(np.array([1.0, 1.0]), np.array([1.0, -1.0]))

    @property
    def angle(self) -> float:
        """Angle from u to v in [0, 2 pi)."""
        return (math.atan2(self.v[1], self.v[0]) - math.atan2(self.u[1], self.u[0])) % TWO_PI

    def swapped(self) -> "DirectionPair":
        return DirectionPair(self.v, self.u)


def _in_arc(t: float, start: float, end: float) -> bool:
    """Whether t lies on the counterclockwise arc from start to end."""
    return (t - start) % TWO_PI <= (end - start) % TWO_PI


def chord_involution(oval: Oval, d, t: float, return_flag: bool = False):
    """Second intersection of the line through oval.point(t) with direction *d*.

    The height g(s) = n . (gamma(s) - gamma(t)), n normal to *d*, changes sign
    exactly once on the arc between the support points not containing t; the
    root is bracketed there and polished by Newton steps.  At a support point
    the line is tangent: t itself is returned, with the flag set.
    """
    d = unit(d)
    n = _perp(d)
    t = float(t) % TWO_PI
    s_min, s_max = oval.extremes(d)
    h0 = oval.height(t, n)
    scale = float(np.linalg.norm(oval.point(s_max) - oval.point(s_min)))
    for ext in (s_min, s_max):
        if abs(oval.height(ext, n) - h0) <= TANGENCY_TOL * scale:
            return (t, True) if return_flag else t
    lo, hi = (s_max, s_min) if _in_arc(t, s_min, s_max) else (s_min, s_max)
    hi_lift = lo + (hi - lo) % TWO_PI

    def g(s):
        return oval.height(s, n) - h0

    root = brentq(g, lo, hi_lift, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    for _ in range(2):
        slope = float(oval.tangent(root) @ n)
        if slope == 0.0:
            break
        step = g(root) / slope
        if not abs(step) < 1e-8:
            break
        root -= step
    root %= TWO_PI
    return (root, False) if return_flag else root


def tuv_map(oval: Oval, dirs: DirectionPair, t: float) -> float:
    """T_(u,v)(t): the u-involution followed by the v-involution."""
    return chord_involution(oval, dirs.v, chord_involution(oval, dirs.u, t))


def tuv_lift(oval: Oval, dirs: DirectionPair, x: float) -> float:
    """Lift of T_(u,v) to the line with displacement in [0, 2 pi)."""
    return x + (tuv_map(oval, dirs, x) - x) % TWO_PI


def orbit(oval: Oval, dirs: DirectionPair, t0: float, n: int) -> np.ndarray:
    """Lifted orbit t0, T(t0), ..., T^n(t0)."""
    out = np.empty(n + 1)
    out[0] = t0
    for i in range(n):
        out[i + 1] = tuv_lift(oval, dirs, out[i])
    return out


def weighted_birkhoff_mean(increments) -> float:
    """Birkhoff mean with the smooth bump weight exp(-1/(x(1-x))).

    For maps conjugate to a Diophantine rotation the error decays faster than
    any power of the orbit length, against 1/N for the plain mean.
    """
    inc = np.asarray(increments, dtype=float)
    n = len(inc)
    x = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (x * (1.0 - x)))
    return float(w @ inc / w.sum())


def rotation_number_of_orbit(lifted_orbit, period: float = TWO_PI, weighted: bool = True) -> float:
    inc = np.diff(np.asarray(lifted_orbit, dtype=float)) / period
    mean = weighted_birkhoff_mean(inc) if weighted else float(inc.mean())
    return mean % 1.0


def rotation_number_oval(oval: Oval, dirs: DirectionPair, n: int = 10_000, t0: float = 0.0,
                         weighted: bool = True) -> float:
    """Rotation number of T_(u,v) in [0, 1) from an orbit of length n."""
    return rotation_number_of_orbit(orbit(oval, dirs, t0, n), weighted=weighted)


@dataclass(frozen=True)
class TranslationReport:
    dirs: DirectionPair
    shift: float
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def translation_property_test(oval: Oval, dirs_sample: Sequence[DirectionPair], samples: int = 256,
                              tol: float = 1e-8) -> list[TranslationReport]:
    """How far T_(u,v) is from a translation t -> t + c in the oval's parameter.

    c is the circular mean of T(t) - t over the samples; the residual is
    max |T(gamma(t)) - gamma(t + c)| in the plane.
    """
    ts = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    reports = []
    for dirs in dirs_sample:
        images = np.array([tuv_map(oval, dirs, t) for t in ts])
        diff = images - ts
        c = math.atan2(np.sin(diff).mean(), np.cos(diff).mean()) % TWO_PI
        residual = float(np.max(np.linalg.norm(oval.point(images) - oval.point(ts + c), axis=1)))
        reports.append(TranslationReport(dirs, c, residual, tol))
    return reports


# -- folded null billiard: the b -> 0 limit of the ellipsoid map ----------


def _exit_parameter(a: float, c: float, p: np.ndarray, d: np.ndarray) -> float:
    """Forward ray parameter where p + s d leaves the ellipse x^2/a + z^2/c <= 1."""
    A = d[0] ** 2 / a + d[1] ** 2 / c
    B = p[0] * d[0] / a + p[1] * d[1] / c
    C = p[0] ** 2 / a + p[1] ** 2 / c - 1.0
    return (-B + math.sqrt(max(B * B - A * C, 0.0))) / A


def folded_null_billiard_map(a: float, c: float, t: float, max_bounces: int = 100_000) -> float:
    """Limit of the ellipsoid map T as b -> 0, acting on the equator parameter t.

    The ellipsoid collapses onto two copies (sheets y > 0 and y < 0) of the
    ellipse x^2/a + z^2/c = 1 glued along its boundary.  Null lines have
    slopes +-1.  A path runs north-east (eastward on the current sheet) and:
    on meeting the boundary where |z|/c > |x|/a, the tropic arcs, it cusps
    and heads south; on the side arcs it passes to the other sheet, reversing
    its x-direction.  The image is the equator point (x = sqrt(a) cos t1,
    sheet = sign(sin t1)) where it returns to z = 0.
    """
    ra = math.sqrt(a)
    sheet = 1.0 if math.sin(t) > 0 else -1.0
    p = np.array([ra * math.cos(t), 0.0])
    d = np.array([-sheet, 1.0])
    north = True
    for _ in range(max_bounces):
        s = _exit_parameter(a, c, p, d)
        q = p + s * d
        if not north and q[1] <= 0.0:
            x1 = p[0] - p[1] * d[0] / d[1]
            t1 = math.acos(min(1.0, max(-1.0, x1 / ra)))
            t1 = t1 if sheet > 0 else TWO_PI - t1
            return t + (t1 - t) % TWO_PI
        on_tropic_arc = abs(q[1]) / c > abs(q[0]) / a
        if on_tropic_arc:
            if not north:
                raise RuntimeError("path reached the southern tropic arc before the equator")
            d = np.array([d[0], -d[1]])
            north = False
        else:
            d = np.array([-d[0], d[1]])
            sheet = -sheet
        p = q
    raise RuntimeError("no return to the equator")


def folded_null_billiard_rotation(a: float, c: float, n: int = 10_000, t0: float = 0.7) -> float:
    """Rotation number of the folded null billiard, from an orbit of length n."""
    pts = np.empty(n + 1)
    pts[0] = t0
    for i in range(n):
        pts[i + 1] = folded_null_billiard_map(a, c, pts[i])
    return rotation_number_of_orbit(pts)
