"""The pseudo-confocal family of quadrics

    M_lam:  x^2/(a+lam) + y^2/(b+lam) + z^2/(c-lam) = 1,

its members through a point, its members tangent to a line, and the
intersection curves Gamma_lam = M_0 & M_lam on the base ellipsoid.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .mink_core import CausalClass, as_vec, causal_class
from .surface import EllipsoidShape, SurfacePoint, surface_point

DOUBLE_ROOT_TOL = 1e-9
# discriminant / leading^2 below this (times the root scale squared) is a double root
TANGENCY_DISC_TOL = 1e-12
POLE_TOL = 1e-9


class QuadricKind(enum.Enum):
    TWO_SHEET_HYPERBOLOID = "TwoSheetHyperboloid"
    ONE_SHEET_HYPERBOLOID_LOW = "OneSheetHyperboloidLow"
    ELLIPSOID = "Ellipsoid"
    ONE_SHEET_HYPERBOLOID_HIGH = "OneSheetHyperboloidHigh"
    DEGENERATE = "Degenerate"


class ConicKind(enum.Enum):
    ELLIPSE = "Ellipse"
    HYPERBOLA = "Hyperbola"


@dataclass(frozen=True)
class ConfocalParam:
    lam: float
    kind: QuadricKind


@dataclass(frozen=True)
class Line3:
    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        p = as_vec(self.point)
        d = as_vec(self.direction)
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            raise ValueError("line direction must be nonzero")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", d / norm)


def _poles(shape: EllipsoidShape) -> tuple[float, float, float]:
    return -shape.a, -shape.b, shape.c


def quadric_kind(shape: EllipsoidShape, lam: float, tol: float = POLE_TOL) -> QuadricKind:
    scale = max(shape.a, shape.c)
    if any(abs(lam - pole) <= tol * scale for pole in _poles(shape)):
        return QuadricKind.DEGENERATE
    if lam < -shape.a:
        return QuadricKind.TWO_SHEET_HYPERBOLOID
    if lam < -shape.b:
        return QuadricKind.ONE_SHEET_HYPERBOLOID_LOW
    if lam < shape.c:
        return QuadricKind.ELLIPSOID
    return QuadricKind.ONE_SHEET_HYPERBOLOID_HIGH


def classify(shape: EllipsoidShape, lam: float) -> ConfocalParam:
    return ConfocalParam(float(lam), quadric_kind(shape, lam))


def confocal_function(shape: EllipsoidShape, lam: float, q) -> float:
    """F(lam) = x^2/(a+lam) + y^2/(b+lam) + z^2/(c-lam) - 1."""
    x, y, z = as_vec(q)
    return x * x / (shape.a + lam) + y * y / (shape.b + lam) + z * z / (shape.c - lam) - 1.0


def confocal_normal(shape: EllipsoidShape, lam: float, q) -> np.ndarray:
    """Minkowski normal (x/(a+lam), y/(b+lam), -z/(c-lam)) of M_lam at q."""
    x, y, z = as_vec(q)
    return np.array([x / (shape.a + lam), y / (shape.b + lam), -z / (shape.c - lam)])


def _denominators(shape: EllipsoidShape) -> list[np.poly1d]:
    return [np.poly1d([1.0, shape.a]), np.poly1d([1.0, shape.b]), np.poly1d([-1.0, shape.c])]


def confocal_cubic(shape: EllipsoidShape, q) -> np.poly1d:
    """F(lam) with denominators cleared: a monic cubic in lam."""
    x, y, z = (float(v) for v in as_vec(q))
    da, db, dc = _denominators(shape)
    poly = x * x * db * dc + y * y * da * dc + z * z * da * db - da * db * dc
    return poly


def solve_cubic(coeffs) -> tuple[list[float], bool]:
    """Real roots of c0 x^3 + c1 x^2 + c2 x + c3 (ascending order).

    Trigonometric form for three real roots, Cardano otherwise, one Newton step
    per root.  The flag reports a (numerically) repeated root.
    """
    c0, c1, c2, c3 = (float(v) for v in coeffs)
    B, C, D = c1 / c0, c2 / c0, c3 / c0
    shift = B / 3.0
    p = C - B * B / 3.0
    q = 2.0 * B**3 / 27.0 - B * C / 3.0 + D
    disc = 4.0 * p**3 + 27.0 * q * q
    disc_scale = 4.0 * abs(p) ** 3 + 27.0 * q * q
    repeated = disc_scale == 0.0 or abs(disc) <= DOUBLE_ROOT_TOL * disc_scale
    if disc_scale == 0.0:
        ys = [0.0]
    elif disc < 0.0 or repeated and p < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ys = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    else:
        root = math.sqrt(max(disc, 0.0) / 108.0)
        ys = [float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))]
    roots = []
    for yv in ys:
        lam = yv - shift
        f = ((lam + B) * lam + C) * lam + D
        df = (3.0 * lam + 2.0 * B) * lam + C
        if df != 0.0:
            lam -= f / df
        roots.append(lam)
    roots.sort()
    if repeated and len(roots) == 3:
        # collapse the coincident pair
        gaps = [roots[1] - roots[0], roots[2] - roots[1]]
        i = 0 if gaps[0] <= gaps[1] else 1
        roots = roots[:i] + [0.5 * (roots[i] + roots[i + 1])] + roots[i + 2:]
    return roots, repeated


def confocal_through_point(shape: EllipsoidShape, q) -> list[ConfocalParam]:
    """The pseudo-confocal quadrics through q (one or three of them)."""
    cubic = confocal_cubic(shape, q)
    roots, repeated = solve_cubic(cubic.coeffs)
    out = []
    for lam in roots:
        param = classify(shape, lam)
        if repeated:
            param = ConfocalParam(param.lam, QuadricKind.DEGENERATE)
        out.append(param)
    return out


def tangency_polynomial(shape: EllipsoidShape, line: Line3) -> np.poly1d:
    """Quadratic in lam whose roots are the quadrics tangent to *line*.

    Along p + s d the equation of M_lam reads A s^2 + 2B s + C = 0; tangency is
    B^2 = AC.  Multiplying B^2 - AC by the three denominators gives

        sum_i d_i^2 al_j al_k - sum_{i<j} (p_i d_j - p_j d_i)^2 al_k,

    (i, j, k distinct), a polynomial of degree two with leading coefficient
    -<d, d>.
    """
    p, d = line.point.tolist(), line.direction.tolist()
    al = _denominators(shape)
    poly = np.poly1d([0.0])
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        poly = poly + d[i] ** 2 * al[j] * al[k]
        cross = p[i] * d[j] - p[j] * d[i]
        poly = poly - cross**2 * al[k]
    return poly


def _tangency_rounding(shape: EllipsoidShape, line: Line3) -> np.ndarray:
    """Rounding-error bounds for the coefficients of :func:`tangency_polynomial`."""
    p, d = line.point.tolist(), line.direction.tolist()
    al = [np.poly1d([1.0, abs(shape.a)]), np.poly1d([1.0, abs(shape.b)]), np.poly1d([1.0, abs(shape.c)])]
    poly = np.poly1d([0.0])
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        cross = abs(p[i] * d[j]) + abs(p[j] * d[i])
        poly = poly + d[i] ** 2 * al[j] * al[k] + cross**2 * al[k]
    return 16.0 * np.finfo(float).eps * np.pad(poly.coeffs, (3 - len(poly.coeffs), 0))


def tangent_quadrics_of_line(shape: EllipsoidShape, line: Line3) -> list[ConfocalParam]:
    """Values of lam for which *line* is tangent to M_lam (zero, one or two)."""
    if causal_class(line.direction) is CausalClass.LIGHT_LIKE:
        raise ValueError("tangent quadrics are only defined for space- or time-like lines")
    poly = tangency_polynomial(shape, line)
    c2, c1, c0 = np.pad(poly.coeffs, (3 - len(poly.coeffs), 0))
    disc = c1 * c1 - 4.0 * c2 * c0
    root_scale = max(1.0, abs(c1 / c2), math.sqrt(abs(c0 / c2)))
    e2, e1, e0 = _tangency_rounding(shape, line)
    noise = 2.0 * abs(c1) * e1 + e1 * e1 + 4.0 * (abs(c2) * e0 + abs(c0) * e2)
    if abs(disc) <= max(TANGENCY_DISC_TOL * c2 * c2 * root_scale**2, noise):
        disc = 0.0
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    # numerically stable pair
    qv = -0.5 * (c1 + math.copysign(root, c1)) if c1 != 0.0 else -0.5 * root
    roots = [qv / c2]
    roots.append(c0 / qv if qv != 0.0 else -roots[0])
    roots.sort()
    scale = max(shape.a, shape.c)
    if disc == 0.0:
        roots = [-c1 / (2.0 * c2)]
    out = []
    for lam in roots:
        if any(abs(lam - pole) <= POLE_TOL * scale for pole in _poles(shape)):
            continue
        out.append(classify(shape, lam))
    return out


def tangent_line(p, v) -> Line3:
    return Line3(as_vec(p), as_vec(v))


def projection_conic_coefficients(shape: EllipsoidShape, lam: float) -> tuple[float, float]:
    """(A, B) with A x^2 + B y^2 = 1 the (x, y)-projection of Gamma_lam."""
    a, b, c = shape.a, shape.b, shape.c
    return (a + c) / (a * (a + lam)), (b + c) / (b * (b + lam))


def projection_conic_kind(shape: EllipsoidShape, lam: float) -> ConicKind:
    if not -shape.a < lam < shape.c:
        raise ValueError(f"Gamma_lam is empty for lam={lam}")
    if abs(lam + shape.b) <= POLE_TOL * shape.a:
        raise ValueError("the projection conic degenerates at lam = -b")
    return ConicKind.HYPERBOLA if lam < -shape.b else ConicKind.ELLIPSE


def gamma_curve_point(shape: EllipsoidShape, lam: float, angle: float,
                      sheet: int = 1) -> SurfacePoint:
    """Point of Gamma_lam = M_0 & M_lam at parameter *angle*.

    For -b < lam < c each hemisphere carries a closed curve whose projection is
    the ellipse A x^2 + B y^2 = 1; *sheet* is the sign of z.  For -a < lam < -b
    the curve is a pair of loops around the x-axis and *sheet* is the sign of x;
    the loop is parameterized through its (y, z) projection, an ellipse.
    """
    a, b, c = shape.a, shape.b, shape.c
    kind = projection_conic_kind(shape, lam)
    A, B = projection_conic_coefficients(shape, lam)
    sign = 1.0 if sheet >= 0 else -1.0
    if kind is ConicKind.ELLIPSE:
        x = math.cos(angle) / math.sqrt(A)
        y = math.sin(angle) / math.sqrt(B)
        z2 = c * (1.0 - x * x / a - y * y / b)
        z = sign * math.sqrt(max(z2, 0.0))
    else:
        nb = -B
        head = (c - lam) / (a + c)
        curv = nb / (a * A) + 1.0 / b
        y = math.sqrt(head / curv) * math.cos(angle)
        z = math.sqrt(c * head) * math.sin(angle)
        x = sign * math.sqrt((1.0 + nb * y * y) / A)
    return surface_point(shape, (x, y, z), project=True)


def gamma_function(shape: EllipsoidShape, lam: float, p) -> float:
    """Left minus right side of the Gamma_lam equation; zero on the curve."""
    x, y, z = as_vec(p)
    a, b, c = shape.a, shape.b, shape.c
    return x * x / (a * (a + lam)) + y * y / (b * (b + lam)) - z * z / (c * (c - lam))
