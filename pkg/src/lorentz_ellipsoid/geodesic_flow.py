"""Geodesics of the Lorentz ellipsoid.

The geodesic equation is  x'' = lam(t) N(x)  with the multiplier

    lam = -(u^2/a + v^2/b + w^2/c) / D(x),

which blows up on the tropics.  :func:`integrate` runs an embedded
Dormand-Prince 5(4) scheme with a projection after every accepted step and
stops at the tropic band; :func:`reflect_off_tropic` restarts on the other
branch with the same Joachimsthal value.  Null geodesics can also be followed
straight through the tropic cusp with :func:`null_cusp_flow`, which
desingularizes the null line field.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .mink_core import CausalClass, as_vec, causal_class, mink_dot
from .surface import (
    TROPIC_BAND,
    EllipsoidShape,
    Region,
    classify,
    degeneracy,
    degeneracy_gradient,
    joachimsthal,
    normal,
    null_directions,
    project_to_surface,
    project_to_tangent,
    quadratic_energy,
    tangent_frame,
)


class IntegrationError(RuntimeError):
    """Integration failed; ``last_state`` holds the last accepted state."""

    def __init__(self, message: str, last_state: "GeodesicState | None" = None, time: float = float("nan")):
        super().__init__(message)
        self.last_state = last_state
        self.time = time


class EventKind(enum.Enum):
    TROPIC_HIT = "TropicHit"
    EQUATOR_CROSS = "EquatorCross"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class IntegratorOptions:
    rtol: float = 1e-11
    atol: float = 1e-13
    tropic_band: float = TROPIC_BAND
    max_steps: int = 200_000
    first_step: float | None = None
    event_time_tol: float = 1e-13
    stop_at_equator: bool = False


@dataclass(frozen=True)
class GeodesicState:
    pos: np.ndarray
    vel: np.ndarray
    energy: float
    klass: CausalClass

    def region(self, shape: EllipsoidShape) -> Region:
        return classify(shape, self.pos)


def make_state(shape: EllipsoidShape, pos, vel, normalize: bool = True) -> GeodesicState:
    """Build a state on the ellipsoid.

    The position is projected onto the quadric and the velocity onto the
    tangent plane.  With *normalize*, space/time-like velocities are scaled to
    energy +1/-1 and null ones to unit Euclidean length.
    """
    x = project_to_surface(shape, pos)
    v = project_to_tangent(shape, x, vel)
    klass = causal_class(v)
    if klass is CausalClass.LIGHT_LIKE:
        v = _snap_null(shape, x, v)
        energy = 0.0
    else:
        e = mink_dot(v, v)
        if normalize:
            v = v / math.sqrt(abs(e))
            e = math.copysign(1.0, e)
        energy = e
    return GeodesicState(x, v, energy, klass)


def _snap_null(shape: EllipsoidShape, x, v) -> np.ndarray:
    """Replace *v* by the unit null direction of the same field and orientation."""
    h, m = tangent_frame(shape, x)
    right, left = null_directions(shape, x)
    n = right if (v @ h) * (v @ m) >= 0 else left
    if n @ v < 0:
        n = -n
    return n


@dataclass
class GeodesicTrace:
    shape: EllipsoidShape
    energy: float
    klass: CausalClass
    times: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    arclength: np.ndarray
    events: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> GeodesicState:
        return GeodesicState(self.pos[i].copy(), self.vel[i].copy(), self.energy, self.klass)

    @property
    def final_state(self) -> GeodesicState:
        return self.state(-1)

    @property
    def hit_tropic(self) -> bool:
        return bool(self.events) and self.events[-1][1] is EventKind.TROPIC_HIT

    def event_times(self, kind: EventKind) -> list[float]:
        return [t for t, k in self.events if k is kind]

    def degeneracy(self) -> np.ndarray:
        s = self.shape
        x = self.pos
        return x[:, 0] ** 2 / s.a**2 + x[:, 1] ** 2 / s.b**2 - x[:, 2] ** 2 / s.c**2

    def joachimsthal(self) -> np.ndarray:
        q = (self.vel**2) @ self.shape.diag
        return self.degeneracy() * q

    def rows(self):
        J = self.joachimsthal()
        D = self.degeneracy()
        for i in range(len(self.times)):
            yield (self.times[i], *self.pos[i], *self.vel[i], J[i], D[i])

    def to_csv(self, path_or_file) -> None:
        header = ["time", "x", "y", "z", "u", "v", "w", "J", "D"]
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.rows():
                writer.writerow([f"{float(v):.17g}" for v in row])
        finally:
            if own:
                fh.close()

    @classmethod
    def concatenate(cls, parts: list["GeodesicTrace"]) -> "GeodesicTrace":
        """Join consecutive legs (e.g. around reflections) into one trace."""
        first = parts[0]
        times, pos, vel, arc, events = [], [], [], [], []
        t_off = 0.0
        l_off = 0.0
        for k, part in enumerate(parts):
            skip = 1 if k else 0
            times.append(part.times[skip:] + t_off)
            pos.append(part.pos[skip:])
            vel.append(part.vel[skip:])
            arc.append(part.arclength[skip:] + l_off)
            events.extend((t + t_off, kind) for t, kind in part.events)
            t_off += part.times[-1]
            l_off += part.arclength[-1]
        return cls(first.shape, first.energy, first.klass, np.concatenate(times),
                   np.vstack(pos), np.vstack(vel), np.concatenate(arc), events)


# -- Dormand-Prince 5(4) tableau -------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(f, y, k1, h):
    K = np.empty((7, y.size))
    K[0] = k1
    for i in range(1, 7):
        K[i] = f(y + h * (_A[i] @ K[:i]))
    y_new = y + h * (_B5 @ K)
    err = h * (_E @ K)
    return y_new, err


def _mink_rhs(shape: EllipsoidShape):
    ia, ib, ic = 1.0 / shape.a, 1.0 / shape.b, 1.0 / shape.c

    def f(y):
        x, yy, z, u, v, w = y[0], y[1], y[2], y[3], y[4], y[5]
        d = x * x * ia * ia + yy * yy * ib * ib - z * z * ic * ic
        lam = -(u * u * ia + v * v * ib + w * w * ic) / d
        return np.array([u, v, w, lam * x * ia, lam * yy * ib, -lam * z * ic,
                         math.sqrt(u * u + v * v + w * w)])

    return f


def _riemann_rhs(shape: EllipsoidShape):
    """Euler-Lagrange flow of (dx^2/a + dy^2/b + dz^2/c) / |D| restricted to the ellipsoid."""
    ia, ib, ic = 1.0 / shape.a, 1.0 / shape.b, 1.0 / shape.c

    def f(y):
        x, yy, z, u, v, w = y[0], y[1], y[2], y[3], y[4], y[5]
        d = x * x * ia * ia + yy * yy * ib * ib - z * z * ic * ic
        grad_dot = 2.0 * (x * u * ia * ia + yy * v * ib * ib - z * w * ic * ic)
        q = u * u * ia + v * v * ib + w * w * ic
        s = grad_dot / d
        r = q / d
        return np.array([u, v, w, s * u - r * x * ia, s * v - r * yy * ib, s * w + r * z * ic,
                         math.sqrt(u * u + v * v + w * w)])

    return f


def lagrange_multiplier(shape: EllipsoidShape, s: GeodesicState, band: float = TROPIC_BAND) -> float:
    """The multiplier lam with x'' = lam N(x)."""
    d = degeneracy(shape, s.pos)
    if abs(d) < band:
        raise ZeroDivisionError("the Lagrange multiplier blows up on the tropics")
    return -quadratic_energy(shape, s.vel) / d


def acceleration(shape: EllipsoidShape, s: GeodesicState) -> np.ndarray:
    return lagrange_multiplier(shape, s) * normal(shape, s.pos)


def _make_post(shape: EllipsoidShape, energy: float, klass: CausalClass, riemann: bool = False):
    """Post-step projection onto the quadric and its tangent plane.

    Minkowski energies are not rescaled: near a tropic |v|^2 >> |energy|, so
    <v, v> is computed with heavy cancellation and forcing it back would feed
    that error straight into the Joachimsthal value.  Null velocities are
    snapped to the null line field and kept at unit Euclidean length.
    """
    def post(y):
        x = project_to_surface(shape, y[:3], iterations=2)
        v = project_to_tangent(shape, x, y[3:6])
        if riemann:
            q = quadratic_energy(shape, v) / abs(degeneracy(shape, x))
            if q > 0:
                v *= math.sqrt(energy / q)
        elif klass is CausalClass.LIGHT_LIKE:
            if degeneracy(shape, x) > 0:
                v = _snap_null(shape, x, v)
            else:
                v /= np.linalg.norm(v)
        out = y.copy()
        out[:3] = x
        out[3:6] = v
        return out

    return post


def _run(shape: EllipsoidShape, f, post, y0: np.ndarray, t_max: float, opts: IntegratorOptions,
         energy: float, klass: CausalClass) -> GeodesicTrace:
    band = opts.tropic_band
    t = 0.0
    y = y0.copy()
    times = [0.0]
    ys = [y.copy()]
    events: list = []
    k1 = f(y)
    if opts.first_step is not None:
        h = opts.first_step
    else:
        # a small fraction of the time to reach the band at the current rate
        d0 = abs(degeneracy(shape, y[:3]))
        rate = abs(degeneracy_gradient(shape, y[:3]) @ y[3:6]) + 1e-300
        speed = np.linalg.norm(y[3:6]) + 1e-300
        h = min(1e-2 / speed, 1e-3 * max(d0 - band, band) / rate, t_max)
    steps = 0

    def last_state():
        return GeodesicState(y[:3].copy(), y[3:6].copy(), energy, klass)

    def inside(yv, d_prev):
        d = degeneracy(shape, yv[:3])
        if not math.isfinite(d) or d * d_prev < 0:
            return True
        return abs(d) <= band and abs(d) < abs(d_prev)

    while t < t_max:
        if steps >= opts.max_steps:
            events.append((t, EventKind.STEP_LIMIT))
            break
        h = min(h, t_max - t)
        y_new, err = _dp_step(f, y, k1, h)
        scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = math.sqrt(float(np.mean((err / scale) ** 2))) if np.all(np.isfinite(y_new)) else math.inf
        if not en <= 1.0:
            h *= 0.2 if not math.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
            if h < 1e-15 * max(1.0, t):
                raise IntegrationError("step size underflow", last_state(), t)
            continue
        steps += 1
        y_new = post(y_new)
        d_old = degeneracy(shape, y[:3])
        if inside(y_new, d_old):
            lo, hi = 0.0, h
            y_lo = y
            while hi - lo > opts.event_time_tol:
                mid = 0.5 * (lo + hi)
                y_mid = post(_dp_step(f, y, k1, mid)[0])
                if inside(y_mid, d_old):
                    hi = mid
                else:
                    lo, y_lo = mid, y_mid
                if abs(abs(degeneracy(shape, y_lo[:3])) - band) < 1e-3 * band:
                    break
            if lo > 0.0:
                t += lo
                y = y_lo
                times.append(t)
                ys.append(y.copy())
            events.append((t, EventKind.TROPIC_HIT))
            break
        if y[2] * y_new[2] < 0.0:
            lo, hi = 0.0, h
            y_lo, y_hi = y, y_new
            while hi - lo > opts.event_time_tol and y_lo[2] != 0.0:
                mid = 0.5 * (lo + hi)
                y_mid = post(_dp_step(f, y, k1, mid)[0])
                if y_mid[2] * y[2] > 0:
                    lo, y_lo = mid, y_mid
                else:
                    hi, y_hi = mid, y_mid
            frac = y_lo[2] / (y_lo[2] - y_hi[2]) if y_hi[2] != y_lo[2] else 0.0
            t_cross = t + lo + frac * (hi - lo)
            events.append((t_cross, EventKind.EQUATOR_CROSS))
            if opts.stop_at_equator:
                y_cross = y_lo + frac * (y_hi - y_lo)
                y_cross[2] = 0.0
                if t_cross > t:
                    y = post(y_cross)
                    t = t_cross
                    times.append(t)
                    ys.append(y.copy())
                break
        t += h
        y = y_new
        times.append(t)
        ys.append(y.copy())
        k1 = f(y)
        h *= min(5.0, 0.9 * en ** -0.2) if en > 0 else 5.0
    arr = np.array(ys)
    return GeodesicTrace(shape, energy, klass, np.array(times), arr[:, :3], arr[:, 3:6], arr[:, 6], events)


def integrate(shape: EllipsoidShape, s0: GeodesicState, t_max: float,
              opts: IntegratorOptions | None = None) -> GeodesicTrace:
    """Integrate the geodesic through *s0* up to *t_max* or the first tropic hit."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    opts = opts or IntegratorOptions()
    y0 = np.concatenate([s0.pos, s0.vel, [0.0]])
    post = _make_post(shape, s0.energy, s0.klass)
    return _run(shape, _mink_rhs(shape), post, y0, t_max, opts, s0.energy, s0.klass)


def equivalent_geodesic(shape: EllipsoidShape, s0: GeodesicState, t_max: float,
                        opts: IntegratorOptions | None = None) -> GeodesicTrace:
    """Geodesic of the equivalent Riemannian metric with the same initial data."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    opts = opts or IntegratorOptions()
    d = degeneracy(shape, s0.pos)
    if abs(d) < opts.tropic_band:
        raise ValueError("initial point lies on a tropic")
    energy = quadratic_energy(shape, s0.vel) / abs(d)
    y0 = np.concatenate([s0.pos, s0.vel, [0.0]])
    post = _make_post(shape, energy, s0.klass, riemann=True)
    return _run(shape, _riemann_rhs(shape), post, y0, t_max, opts, energy, s0.klass)


def equivalent_multiplier(shape: EllipsoidShape, pos, vel) -> float:
    """A(Q'') . Q + A(P) . P along the equivalent flow; identically zero."""
    f = _riemann_rhs(shape)
    acc = f(np.concatenate([pos, vel, [0.0]]))[3:6]
    A = shape.diag
    return float((A * acc) @ pos + (A * vel) @ vel)


# -- behaviour at the tropics ----------------------------------------------


def rescaled_direction(shape: EllipsoidShape, s: GeodesicState) -> np.ndarray:
    """mu (u, v, w) with mu = sqrt(|D|): bounded as the geodesic nears a tropic."""
    return math.sqrt(abs(degeneracy(shape, s.pos))) * s.vel


def approach_tropic_direction(shape: EllipsoidShape, trace: GeodesicTrace) -> np.ndarray:
    """Rescaled direction at the end of a trace that stopped on a tropic."""
    if not trace.hit_tropic:
        raise ValueError("trace does not end in a TropicHit event")
    s = trace.final_state
    if s.klass is CausalClass.LIGHT_LIKE:
        return s.vel.copy()
    return rescaled_direction(shape, s)


def tropic_distance(shape: EllipsoidShape, pos) -> float:
    """First-order surface distance to the tropic: |D| / |tangential grad D|."""
    x = as_vec(pos)
    g = project_to_tangent(shape, x, degeneracy_gradient(shape, x))
    return abs(degeneracy(shape, x)) / float(np.linalg.norm(g))


def rescaled_direction_at_distance(shape: EllipsoidShape, trace: GeodesicTrace, distance: float) -> np.ndarray:
    """Rescaled direction where a tropic-bound trace is *distance* from the tropic.

    Linear interpolation between the two samples bracketing the distance.
    """
    if not trace.hit_tropic:
        raise ValueError("trace does not end in a TropicHit event")
    dist = np.array([tropic_distance(shape, p) for p in trace.pos])
    below = np.nonzero(dist <= distance)[0]
    if not len(below) or below[0] == 0:
        raise ValueError("trace never crosses the requested distance from the tropic")
    i = below[0]
    w = (dist[i - 1] - distance) / (dist[i - 1] - dist[i])
    d0 = rescaled_direction(shape, trace.state(i - 1))
    d1 = rescaled_direction(shape, trace.state(i))
    return (1.0 - w) * d0 + w * d1


def branch_velocities(shape: EllipsoidShape, pos, energy: float, j_value: float) -> list[np.ndarray]:
    """Tangent velocities at *pos* with the given energy and Joachimsthal value.

    In the frame (h, m) the two conditions are quadrics in (alpha, beta); their
    common solutions are +-v1 and +-v2, the tangents from *pos* to the conic
    cut out on the tangent plane by the caustic quadric.  For null geodesics
    (energy 0) only the direction matters and unit Euclidean vectors are
    returned.
    """
    x = as_vec(pos)
    h, m = tangent_frame(shape, x)
    d = degeneracy(shape, x)
    S = x[0] ** 2 / shape.a**2 + x[1] ** 2 / shape.b**2
    A = shape.diag
    q_hh, q_hm, q_mm = h @ (A * h), h @ (A * m), m @ (A * m)
    if energy == 0.0:
        if d < 0:
            return []
        r = math.sqrt(d)
        out = []
        for rho in (r, -r):
            v = rho * h + m
            v /= np.linalg.norm(v)
            out += [v, -v]
        return out
    K = j_value / d
    c2 = K * S - energy * q_hh
    c1 = -2.0 * energy * q_hm
    c0 = -(K * S * d + energy * q_mm)
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0 or c2 == 0:
        return []
    sq = math.sqrt(disc)
    qv = -0.5 * (c1 + math.copysign(sq, c1))
    rhos = [qv / c2, c0 / qv] if qv != 0 else [0.0]
    out = []
    for rho in rhos:
        denom = S * (rho * rho - d)
        if denom == 0 or energy / denom <= 0:
            continue
        beta = math.sqrt(energy / denom)
        v = beta * (rho * h + m)
        out += [v, -v]
    return out


def reflect_off_tropic(shape: EllipsoidShape, incoming: GeodesicTrace) -> GeodesicState:
    """Restart state on the other branch of the cusp at the tropic hit.

    Among the velocities at the hit point with the inherited energy and
    Joachimsthal value, keep those heading back into the region and drop the
    reversal of the incoming velocity.  The two branches through a point at
    |D| = band differ only by O(band^(3/2)) in their cusp tips.
    """
    if not incoming.hit_tropic:
        raise ValueError("incoming trace does not end in a TropicHit event")
    s = incoming.final_state
    d = degeneracy(shape, s.pos)
    grad = degeneracy_gradient(shape, s.pos)
    j_in = joachimsthal(shape, s.pos, s.vel)
    back = -s.vel / np.linalg.norm(s.vel)
    best = None
    for v in branch_velocities(shape, s.pos, s.energy, j_in):
        if (grad @ v) * d <= 0:  # must move away from the tropic
            continue
        gap = np.linalg.norm(v / np.linalg.norm(v) - back)
        if best is None or gap > best[0]:
            best = (gap, v)
    if best is None or best[0] < 1e-12:
        raise IntegrationError("no second branch found at the tropic", s)
    v = best[1]
    if s.klass is not CausalClass.LIGHT_LIKE:
        # same J exactly: rescale in the J direction (energy already matches)
        v = v * math.sqrt(j_in / joachimsthal(shape, s.pos, v))
    return GeodesicState(s.pos.copy(), v, s.energy, s.klass)


def integrate_with_reflections(shape: EllipsoidShape, s0: GeodesicState, t_max: float,
                               opts: IntegratorOptions | None = None,
                               max_reflections: int = 1000) -> GeodesicTrace:
    """Follow a geodesic for time *t_max*, reflecting off the tropics on the way."""
    opts = opts or IntegratorOptions()
    parts = []
    state = s0
    remaining = t_max
    for _ in range(max_reflections + 1):
        part = integrate(shape, state, remaining, opts)
        parts.append(part)
        remaining -= part.times[-1]
        if not part.hit_tropic or remaining <= 0:
            break
        state = reflect_off_tropic(shape, part)
    return GeodesicTrace.concatenate(parts)


# -- null geodesics through the cusp ----------------------------------------


def _null_cusp_rhs(shape: EllipsoidShape):
    """Null line field desingularized at the tropic.

    With r^2 = D and parameter sigma the null geodesic solves
        x' = r (r h + m),   r' = grad(D) . (r h + m) / 2,
    which is smooth through r = 0: r changes sign at the cusp, turning a right
    null geodesic into a left one.  The last component accumulates the
    equator angle atan2(y/sqrt(b), x/sqrt(a)).
    """
    a, b, c = shape.a, shape.b, shape.c
    sa, sb = math.sqrt(a), math.sqrt(b)

    def f(_s, y):
        x, yy, z, r = y[0], y[1], y[2], y[3]
        hx, hy = -yy / b, x / a
        mx, my, mz = -z * x / (a * c), -z * yy / (b * c), x * x / (a * a) + yy * yy / (b * b)
        dx = r * (r * hx + mx)
        dy = r * (r * hy + my)
        dz = r * mz
        gx, gy, gz = 2 * x / (a * a), 2 * yy / (b * b), -2 * z / (c * c)
        dr = 0.5 * (gx * (r * hx + mx) + gy * (r * hy + my) + gz * mz)
        X, Y = x / sa, yy / sb
        dth = (X * dy / sb - Y * dx / sa) / (X * X + Y * Y)
        return [dx, dy, dz, dr, dth]

    return f


@dataclass(frozen=True)
class CuspLeg:
    """A null geodesic from the equator through a tropic cusp back to the equator."""

    start_t: float
    end_t: float
    cusp_point: np.ndarray
    end_point: np.ndarray
    sigma: np.ndarray
    path: np.ndarray


def null_cusp_flow(shape: EllipsoidShape, t: float, north: bool = True,
                   rtol: float = 1e-12, atol: float = 1e-13, dense: bool = False) -> CuspLeg:
    """Null geodesic from equator point Q(t) through the tropic and back.

    With *north* the leg starts along the right null direction, cusps on the
    Northern tropic and returns along the left one; otherwise left first and
    via the Southern tropic.  ``end_t`` is the lifted equator parameter of the
    return point.
    """
    p = shape.equator_point(t)
    r0 = math.sqrt(degeneracy(shape, p))
    if not north:
        r0 = -r0
    f = _null_cusp_rhs(shape)

    def back_at_equator(_s, y):
        return y[2]

    back_at_equator.terminal = True
    back_at_equator.direction = -1.0 if north else 1.0

    def cusp(_s, y):
        return y[3]

    y0 = [p[0], p[1], 0.0, r0, 0.0]
    # leave the equator before arming the return event
    span = 1e4
    sol = solve_ivp(f, (0.0, span), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=[back_at_equator, cusp], dense_output=dense)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise IntegrationError(f"null geodesic from t={t} did not return to the equator")
    y_end = sol.y_events[0][-1]
    cusp_pts = sol.y_events[1]
    cusp_point = cusp_pts[0][:3] if len(cusp_pts) else np.full(3, np.nan)
    end_point = project_to_surface(shape, y_end[:3])
    return CuspLeg(t, t + y_end[4], np.asarray(cusp_point), end_point, sol.t, sol.y[:3].T)


# -- the local model dy^2 - x dx^2 ------------------------------------------


@dataclass(frozen=True)
class ModelCurve:
    x: np.ndarray
    y: np.ndarray


def normal_form_null_curves(C: float, x_max: float, n: int = 400, branch: int = 1) -> ModelCurve:
    """Null curve (y')^2 = x of dy^2 - x dx^2 issuing from the cusp point (0, C).

    Integrated numerically with the curve parameter p = sqrt(x), in which the
    system x' = 2p, y' = 2 branch p^2 is regular at the cusp.
    """
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    p_max = math.sqrt(x_max)

    def f(_p, s):
        p = _p
        return [2.0 * p, 2.0 * branch * p * p]

    grid = np.linspace(0.0, p_max, n + 1)
    sol = solve_ivp(f, (0.0, p_max), [0.0, C], method="DOP853", rtol=1e-13, atol=1e-15, t_eval=grid)
    return ModelCurve(sol.y[0], sol.y[1])


def cusp_exponent(curve: ModelCurve, C: float = 0.0, lo_frac: float = 1e-3) -> float:
    """Least-squares slope of log|y - C| against log x on the upper part of the curve."""
    x, y = curve.x, np.abs(curve.y - C)
    keep = (x > lo_frac * x.max()) & (y > 0)
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


def normal_form_geodesic(x0: float, v: float, t_max: float, x_stop: float = 1e-10) -> dict:
    """Space-like geodesic of dy^2 - x dx^2 moving toward the line x = 0.

    y-translations are symmetries, so v = y' is conserved and the unit-length
    condition v^2 - x u^2 = 1 gives u = -sqrt((v^2 - 1)/x).  Returns samples
    of (t, x, y, u) up to x = x_stop.
    """
    if v * v <= 1.0:
        raise ValueError("a space-like geodesic reaching x = 0 needs v^2 > 1")
    k = v * v - 1.0

    def f(_t, s):
        x = max(s[0], 0.0)
        return [-math.sqrt(k / x) if x > 0 else -math.inf, v]

    def stop(_t, s):
        return s[0] - x_stop

    stop.terminal = True
    sol = solve_ivp(f, (0.0, t_max), [x0, 0.0], method="DOP853", rtol=1e-12, atol=1e-15, events=stop)
    x = sol.y[0]
    u = -np.sqrt(k / np.maximum(x, x_stop))
    return {"t": sol.t, "x": x, "y": sol.y[1], "u": u, "v": np.full_like(x, v)}
