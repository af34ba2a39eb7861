"""Null geodesics in the equatorial belt and the closure map T.

Geodesics crossing the equator at Q(t) = (sqrt(a) cos t, sqrt(b) sin t, 0) are
labelled by (t, tau).  We use a signed tau: the northward unit time-like
velocity is

    (u, v, w) = (tau Q'(t) / f(t), sqrt(1 + tau^2)),   f(t) = |Q'(t)|,

so tau -> +inf is the right null direction and tau -> -inf the left one.

T sends Q(t) along the right null geodesic to the Northern tropic and back
along the left one.  In the coordinate s with ds proportional to h(t) dt it is
a rigid shift.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .geodesic_flow import (
    IntegratorOptions,
    integrate,
    make_state,
    null_cusp_flow,
    reflect_off_tropic,
)
from .surface import EllipsoidShape, joachimsthal, null_directions

TWO_PI = 2.0 * math.pi
SHIFT_SPREAD_TOL = 1e-5


class NullSide(enum.Enum):
    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True)
class EquatorCoord:
    """A geodesic through the equator: time-like (finite tau) or null (side set)."""

    t: float
    tau: float | None = None
    side: NullSide | None = None

    def __post_init__(self):
        if (self.tau is None) == (self.side is None):
            raise ValueError("give exactly one of tau (time-like) or side (null)")
        if self.tau is not None and not math.isfinite(self.tau):
            raise ValueError("tau must be finite; use side= for null geodesics")

    @property
    def is_null(self) -> bool:
        return self.side is not None

    @classmethod
    def from_angle(cls, t: float, alpha: float) -> "EquatorCoord":
        """Chart point from the angle alpha in (pi/4, 3pi/4) between Q'(t) and the velocity."""
        if not math.pi / 4 < alpha < 3 * math.pi / 4:
            raise ValueError("time-like geodesics need pi/4 < alpha < 3pi/4")
        if alpha == math.pi / 2:
            return cls(t, 0.0)
        tau = 1.0 / math.sqrt(math.tan(alpha) ** 2 - 1.0)
        return cls(t, tau if alpha < math.pi / 2 else -tau)


def area_form_density(shape: EllipsoidShape, t: float) -> float:
    """f(t) = sqrt(a sin^2 t + b cos^2 t), the density of omega = f dtau ^ dt."""
    return math.sqrt(shape.a * math.sin(t) ** 2 + shape.b * math.cos(t) ** 2)


def state_from_chart(shape: EllipsoidShape, q: EquatorCoord):
    """Geodesic state on the equator for a chart point."""
    p = shape.equator_point(q.t)
    if q.is_null:
        right, left = null_directions(shape, p)
        return make_state(shape, p, right if q.side is NullSide.RIGHT else left)
    f = area_form_density(shape, q.t)
    dq = np.array([-math.sqrt(shape.a) * math.sin(q.t), math.sqrt(shape.b) * math.cos(q.t), 0.0])
    vel = q.tau * dq / f
    vel[2] = math.sqrt(1.0 + q.tau**2)
    return make_state(shape, p, vel, normalize=False)


def joachimsthal_chart(shape: EllipsoidShape, q: EquatorCoord) -> float:
    """J = (c tau^2 + f^2 (1 + tau^2)) / (abc) for time-like chart points."""
    if q.is_null:
        raise ValueError("the Joachimsthal integral is unbounded on null geodesics")
    f2 = area_form_density(shape, q.t) ** 2
    a, b, c = shape.a, shape.b, shape.c
    return (c * q.tau**2 + f2 * (1.0 + q.tau**2)) / (a * b * c)


def joachimsthal_chart_oracle(shape: EllipsoidShape, q: EquatorCoord) -> float:
    """Same value computed from the reconstructed state."""
    s = state_from_chart(shape, q)
    return joachimsthal(shape, s.pos, s.vel)


def h_form(shape: EllipsoidShape, t) -> np.ndarray | float:
    """h(t) = sqrt(f^2 / (c + f^2)), the T-invariant density on the equator."""
    f2 = shape.a * np.sin(t) ** 2 + shape.b * np.cos(t) ** 2
    out = np.sqrt(f2 / (shape.c + f2))
    return float(out) if np.ndim(out) == 0 else out


def h_form_residual(shape: EllipsoidShape, t: float, tau: float, rel_step: float = 1e-3) -> float:
    """|d(J^(1/2)) ^ h dt - omega| / (dtau ^ dt) at (t, tau).

    d(J^(1/2)) ^ h dt only sees the tau-derivative, taken here by central
    differences.  sqrt(abc) fixes the constant left free in h.
    """
    d = rel_step * abs(tau)

    def root_j(x):
        return math.sqrt(joachimsthal_chart(shape, EquatorCoord(t, x)))

    dj = (root_j(tau + d) - root_j(tau - d)) / (2.0 * d)
    scale = math.sqrt(shape.a * shape.b * shape.c)
    return abs(scale * dj * h_form(shape, t) - area_form_density(shape, t))


def decay_exponent(taus, residuals) -> float:
    """Slope p of the fit residual ~ tau^(-p)."""
    slope, _ = np.polyfit(np.log(np.asarray(taus, float)), np.log(np.asarray(residuals, float)), 1)
    return float(-slope)


class NullCoordinate:
    """The normalized primitive s(t) of h(t) dt, lifted to the real line.

    A table of 4096 equally spaced nodes holds the cumulative integrals;
    s(t) adds one adaptive quadrature from the nearest node below, and the
    inverse uses monotone interpolation of the table plus Newton steps.
    """

    NODES = 4096

    def __init__(self, shape: EllipsoidShape, nodes: int = NODES):
        self.shape = shape
        self.nodes = np.linspace(0.0, TWO_PI, nodes + 1)
        pieces = [quad(self._h, lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
                  for lo, hi in zip(self.nodes[:-1], self.nodes[1:])]
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        self.period = float(cum[-1])
        self.cum = cum / self.period
        self._inv = PchipInterpolator(self.cum, self.nodes)

    def _h(self, t):
        return h_form(self.shape, t)

    def density(self, t) -> float:
        return h_form(self.shape, t) / self.period

    def __call__(self, t: float) -> float:
        """Lifted s(t): s(t + 2 pi) = s(t) + 1."""
        turns = math.floor(t / TWO_PI)
        r = t - turns * TWO_PI
        step = TWO_PI / (len(self.nodes) - 1)
        i = min(int(r / step), len(self.nodes) - 2)
        part = quad(self._h, self.nodes[i], r, epsabs=1e-14, epsrel=1e-13)[0] / self.period
        return turns + self.cum[i] + part

    def inverse(self, s: float) -> float:
        """Lifted t with s(t) = s."""
        turns = math.floor(s)
        frac = s - turns
        t = float(self._inv(frac))
        for _ in range(3):
            err = self(t) - frac
            t -= err / self.density(t)
            if abs(err) < 1e-15:
                break
        return t + turns * TWO_PI


@dataclass(frozen=True)
class PonceletSample:
    t: float
    t1: float
    s: float
    s1: float
    delta: float


class PonceletMap:
    """The map T of one ellipsoid, with its s-coordinate cached."""

    def __init__(self, shape: EllipsoidShape, north: bool = True, method: str = "cusp"):
        if method not in ("cusp", "events"):
            raise ValueError("method must be 'cusp' or 'events'")
        self.shape = shape
        self.north = north
        self.method = method

    @cached_property
    def coordinate(self) -> NullCoordinate:
        return NullCoordinate(self.shape)

    def lift(self, t: float) -> float:
        """Lifted image t1 of t, continuous in t with t1 - t in (0, 2 pi)."""
        if self.method == "cusp":
            return null_cusp_flow(self.shape, t, north=self.north).end_t
        return _two_leg_map(self.shape, t, self.north)

    def __call__(self, t: float) -> float:
        return self.lift(t) % TWO_PI

    def iterate(self, t: float, k: int) -> float:
        for _ in range(k):
            t = self.lift(t)
        return t

    def shift(self, t: float) -> float:
        """Lifted s(T(t)) - s(t)."""
        s = self.coordinate
        return s(self.lift(t)) - s(t)

    def sample(self, t: float) -> PonceletSample:
        t1 = self.lift(t)
        s0, s1 = self.coordinate(t), self.coordinate(t1)
        return PonceletSample(t, t1, s0 % 1.0, s1 % 1.0, (s1 - s0) % 1.0)


def _two_leg_map(shape: EllipsoidShape, t: float, north: bool) -> float:
    """T through explicit integrate / reflect_off_tropic legs."""
    p = shape.equator_point(t)
    right, left = null_directions(shape, p)
    start = right if north else -left
    first = integrate(shape, make_state(shape, p, start), 1e3)
    if not first.hit_tropic:
        raise RuntimeError(f"null geodesic from t={t} missed the tropic")
    back = integrate(shape, reflect_off_tropic(shape, first), 1e3, IntegratorOptions(stop_at_equator=True))
    end = back.pos[-1]
    ang = math.atan2(end[1] / math.sqrt(shape.b), end[0] / math.sqrt(shape.a))
    # the leg never winds more than once around the axis
    lift = t + (ang - t) % TWO_PI
    return lift


def poncelet_map(shape: EllipsoidShape, t: float, north: bool = True, method: str = "cusp") -> float:
    """T(t) as a lifted equator parameter."""
    return PonceletMap(shape, north, method).lift(t)


def lifted_shift(shape: EllipsoidShape, t0: float = 0.0, tmap: PonceletMap | None = None) -> float:
    """s(T(t0)) - s(t0) on the real line; continuous along families of shapes."""
    return (tmap or PonceletMap(shape)).shift(t0)


@dataclass(frozen=True)
class RotationEstimate:
    delta: float
    spread: float
    lifted: float
    samples: int


class ShiftSpreadError(RuntimeError):
    pass


def rotation_estimate(shape: EllipsoidShape, samples: int = 16, tmap: PonceletMap | None = None,
                      spread_tol: float = SHIFT_SPREAD_TOL) -> RotationEstimate:
    tmap = tmap or PonceletMap(shape)
    ts = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    shifts = np.array([tmap.shift(t) for t in ts])
    spread = float(shifts.max() - shifts.min())
    if spread > spread_tol:
        raise ShiftSpreadError(f"shift varies by {spread:.3e} over the equator")
    lifted = float(shifts.mean())
    return RotationEstimate(lifted % 1.0, spread, lifted, samples)


def rotation_number(shape: EllipsoidShape, samples: int = 16) -> float:
    """The shift constant Delta of T in the s-coordinate, mod 1."""
    return rotation_estimate(shape, samples).delta


def birkhoff_rotation_number(shape: EllipsoidShape, n: int = 1000, t0: float = 0.0,
                             tmap: PonceletMap | None = None) -> float:
    """Mean lift increment of s along an orbit of length n, mod 1."""
    tmap = tmap or PonceletMap(shape)
    s = tmap.coordinate
    t = tmap.iterate(t0, n)
    return ((s(t) - s(t0)) / n) % 1.0


@dataclass(frozen=True)
class ClosureResult:
    found: bool
    shape: EllipsoidShape | None
    parameter: float | None
    shift: float | None
    max_return_error: float | None
    message: str


def _circle_distance(x: float) -> float:
    r = x % 1.0
    return min(r, 1.0 - r)


def closure_search(family: Callable[[float], EllipsoidShape], lo: float, hi: float, k: int, r: int,
                   probes: int = 12, verify_points: int = 20, xtol: float = 1e-13,
                   return_tol: float = 1e-6) -> ClosureResult:
    """Find a shape on family(p), lo < p < hi, whose map T has shift r/k.

    The lifted shift is sampled at *probes* parameters and must be monotone
    there; it is then bisected to a bracket of width *xtol*.  The result is
    certified by checking that T^k moves each of *verify_points* equator
    points by r turns in s, up to *return_tol*.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    target = r / k
    grid = np.geomspace(lo, hi, probes) if lo > 0 else np.linspace(lo, hi, probes)
    values = np.array([lifted_shift(family(p)) for p in grid])
    steps = np.diff(values)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        return ClosureResult(False, None, None, None, None, "shift is not monotone along the family")
    g = values - target
    idx = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    if not len(idx):
        return ClosureResult(False, None, None, None, None,
                             f"target {target:.6g} outside the shift range [{values.min():.6g}, {values.max():.6g}]")
    i = int(idx[0])
    p_star = brentq(lambda p: lifted_shift(family(p)) - target, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
    shape = family(p_star)
    tmap = PonceletMap(shape)
    shift = tmap.shift(0.0)
    s = tmap.coordinate
    worst = 0.0
    for t in np.linspace(0.0, TWO_PI, verify_points, endpoint=False):
        worst = max(worst, _circle_distance(s(tmap.iterate(t, k)) - s(t)))
    ok = bool(worst <= return_tol)
    msg = f"T^{k} returns {verify_points} points within {worst:.2e}" if ok else \
        f"T^{k} return error {worst:.2e} exceeds {return_tol:g}"
    return ClosureResult(ok, shape, float(p_star), float(shift), float(worst), msg)
