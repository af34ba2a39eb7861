import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from lorentz_ellipsoid.confocal import (
    ConicKind,
    Line3,
    QuadricKind,
    confocal_function,
    confocal_normal,
    confocal_through_point,
    gamma_curve_point,
    gamma_function,
    projection_conic_kind,
    quadric_kind,
    tangent_line,
    tangent_quadrics_of_line,
)
from lorentz_ellipsoid.mink_core import mink_dot
from lorentz_ellipsoid.surface import (
    EllipsoidShape,
    degeneracy,
    null_directions,
    quadric_residual,
    random_surface_points,
    tangent_frame,
)


def bisection_roots(shape, q):
    """Oracle: sign changes of F on each interval between the poles."""
    a, b, c = shape.a, shape.b, shape.c
    edges = [-1e6, -a, -b, c, 1e6]
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        grid = np.linspace(lo, hi, 20001)[1:-1]
        vals = [confocal_function(shape, g, q) for g in grid]
        for i in range(len(grid) - 1):
            if np.sign(vals[i]) != np.sign(vals[i + 1]) and abs(vals[i]) < 1e3 and abs(vals[i + 1]) < 1e3:
                roots.append(brentq(lambda l: confocal_function(shape, l, q), grid[i], grid[i + 1], xtol=1e-14))
    return sorted(roots)


def test_kind_intervals(shape):
    assert quadric_kind(shape, -5) is QuadricKind.TWO_SHEET_HYPERBOLOID
    assert quadric_kind(shape, -3) is QuadricKind.ONE_SHEET_HYPERBOLOID_LOW
    assert quadric_kind(shape, 0.5) is QuadricKind.ELLIPSOID
    assert quadric_kind(shape, 2) is QuadricKind.ONE_SHEET_HYPERBOLOID_HIGH
    for pole in (-4, -2, 1):
        assert quadric_kind(shape, pole) is QuadricKind.DEGENERATE


def test_through_point_on_surface(shape):
    lams = [r.lam for r in confocal_through_point(shape, (2.0, 0.0, 0.0))]
    assert min(abs(l) for l in lams) < 1e-12


def test_through_generic_surface_point(shape):
    p = shape.embed(0.3, 1.1)
    roots = confocal_through_point(shape, p)
    assert len(roots) == 3
    kinds = sorted(r.kind.value for r in roots if abs(r.lam) > 1e-9)
    assert kinds == sorted([QuadricKind.ELLIPSOID.value, QuadricKind.ONE_SHEET_HYPERBOLOID_LOW.value])


def test_through_point_matches_bisection(shape):
    q = (1.0, 1.0, 3.0)
    got = [r.lam for r in confocal_through_point(shape, q)]
    want = bisection_roots(shape, q)
    assert len(got) == len(want)
    assert np.allclose(got, want, atol=1e-10)


def test_confocal_gradients_orthogonal(shape, rng):
    for _ in range(50):
        q = rng.normal(size=3) * 1.5
        roots = confocal_through_point(shape, q)
        if len(roots) != 3 or any(r.kind is QuadricKind.DEGENERATE for r in roots):
            continue
        grads = [confocal_normal(shape, r.lam, q) for r in roots]
        grads = [g / np.linalg.norm(g) for g in grads]
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(mink_dot(grads[i], grads[j])) <= 1e-8


def _spacelike_tangent(shape, p, angle):
    h, m = tangent_frame(shape, p)
    return math.cos(angle) * h / np.linalg.norm(h) + math.sin(angle) * m / np.linalg.norm(m)


def test_tangent_line_generic_belt(shape):
    p = shape.embed(0.15, 0.8)
    assert degeneracy(shape, p) > 0
    line = tangent_line(p, _spacelike_tangent(shape, p, 0.3))
    lams = sorted(r.lam for r in tangent_quadrics_of_line(shape, line))
    assert len(lams) == 2
    assert min(abs(l) for l in lams) < 1e-9
    assert max(abs(l) for l in lams) > 1e-3


def test_tangent_line_at_tropic(shape):
    phi = 0.9
    p = shape.embed(shape.tropic_latitude(phi), phi)
    h, _ = tangent_frame(shape, p)
    roots = tangent_quadrics_of_line(shape, tangent_line(p, h))
    assert len(roots) == 1 and abs(roots[0].lam) < 1e-9


def test_tangent_line_equator(shape):
    for t in (0.2, 1.3, 2.9):
        p = shape.equator_point(t)
        d = (-math.sqrt(shape.a) * math.sin(t), math.sqrt(shape.b) * math.cos(t), 0.0)
        roots = tangent_quadrics_of_line(shape, tangent_line(p, d))
        assert len(roots) == 1 and abs(roots[0].lam) < 1e-9


def test_tangent_line_null_direction_error(shape):
    p = shape.equator_point(0.4)
    with pytest.raises(ValueError):
        tangent_quadrics_of_line(shape, tangent_line(p, null_directions(shape, p)[0]))
    with pytest.raises(ValueError):
        Line3(p, (0, 0, 0))


def test_tangent_line_reparameterization(shape, rng):
    p = shape.embed(-0.2, 2.2)
    d = _spacelike_tangent(shape, p, 1.0)
    base = sorted(r.lam for r in tangent_quadrics_of_line(shape, Line3(p, d)))
    for shift in (-1.5, 0.7, 3.0):
        moved = sorted(r.lam for r in tangent_quadrics_of_line(shape, Line3(p + shift * d, -d)))
        assert np.allclose(moved, base, atol=1e-9)


def test_tangent_line_count_on_belt(shape, rng):
    pts = random_surface_points(shape, rng, 1000, region="belt", margin=0.0)
    for p in pts:
        angle = rng.uniform(0, math.pi)
        line = tangent_line(p, _spacelike_tangent(shape, p, angle))
        try:
            roots = tangent_quadrics_of_line(shape, line)
        except ValueError:
            continue
        assert len(roots) in (1, 2)
        if len(roots) == 1:
            near_equator = abs(p[2]) < 1e-6
            assert degeneracy(shape, p) < 1e-6 or near_equator


def test_projection_conic_kind(shape):
    assert projection_conic_kind(shape, -3) is ConicKind.HYPERBOLA
    assert projection_conic_kind(shape, 0.5) is ConicKind.ELLIPSE
    assert projection_conic_kind(shape, 1 - 1e-9) is ConicKind.ELLIPSE
    with pytest.raises(ValueError):
        projection_conic_kind(shape, -2)
    with pytest.raises(ValueError):
        projection_conic_kind(shape, 2)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.9, 0.99).filter(lambda l: abs(l + 2) > 1e-2 and abs(l) > 1e-6),
       st.floats(0, 2 * math.pi), st.sampled_from([1, -1]))
def test_gamma_points_on_both_quadrics(lam, angle, sheet):
    shape = EllipsoidShape(4.0, 2.0, 1.0)
    p = np.asarray(gamma_curve_point(shape, lam, angle, sheet))
    assert abs(quadric_residual(shape, p)) < 1e-9
    assert abs(gamma_function(shape, lam, p)) < 1e-7


def test_gamma_projection_conic(shape):
    a, b, c = shape.a, shape.b, shape.c
    for lam in (-1.0, 0.3, 0.9):
        for angle in np.linspace(0, 2 * math.pi, 11):
            x, y, _ = np.asarray(gamma_curve_point(shape, lam, angle))
            A, B = (a + c) / (a * (a + lam)), (b + c) / (b * (b + lam))
            assert A * x * x + B * y * y == pytest.approx(1.0, abs=1e-10)


def test_gamma_limits(shape):
    for angle in (0.1, 1.7, 4.0):
        near_tropic = np.asarray(gamma_curve_point(shape, 1e-9, angle))
        assert abs(degeneracy(shape, near_tropic)) < 1e-7
        near_equator = np.asarray(gamma_curve_point(shape, shape.c - 1e-10, angle))
        assert abs(near_equator[2]) < 1e-4
    with pytest.raises(ValueError):
        gamma_curve_point(shape, -5.0, 0.0)
