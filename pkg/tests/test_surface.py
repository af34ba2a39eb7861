import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_ellipsoid.mink_core import mink_dot
from lorentz_ellipsoid.surface import (
    EllipsoidShape,
    Region,
    TropicError,
    classify,
    degeneracy,
    equivalent_metric_energy,
    gauss_curvature,
    gauss_curvature_fd,
    joachimsthal,
    normal,
    null_directions,
    project_to_surface,
    project_to_tangent,
    quadric_residual,
    random_surface_points,
    surface_point,
)

S411 = EllipsoidShape(4.0, 1.0 + 1e-12, 1.0)


def tropic_point(shape, phi, north=True):
    th = shape.tropic_latitude(phi)
    return shape.embed(th if north else -th, phi)


def test_shape_validation():
    with pytest.raises(ValueError):
        EllipsoidShape(2.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        EllipsoidShape(4.0, 2.0, -1.0)
    assert EllipsoidShape.parse("4,2,1") == EllipsoidShape(4, 2, 1)


def test_normal_examples():
    assert np.allclose(normal(S411, (2, 0, 0)), (0.5, 0, 0))
    n = normal(S411, (0, 0, 1))
    assert np.allclose(n, (0, 0, -1))
    assert mink_dot(n, n) == pytest.approx(-1.0)


def test_normal_null_on_tropic(shape):
    for phi in np.linspace(0, 2 * math.pi, 7):
        n = normal(shape, tropic_point(shape, phi))
        assert abs(mink_dot(n, n)) < 1e-14


def test_degeneracy_examples(shape):
    assert degeneracy(S411, (2, 0, 0)) == pytest.approx(0.25)
    assert degeneracy(S411, (0, 0, 1)) == pytest.approx(-1.0)
    assert abs(degeneracy(shape, tropic_point(shape, 0.3))) < 1e-14


def test_regions(shape):
    assert classify(shape, shape.equator_point(0.2)) is Region.BELT
    assert classify(shape, (0, 0, 1)) is Region.NORTH_CAP
    assert classify(shape, (0, 0, -1)) is Region.SOUTH_CAP
    assert classify(shape, tropic_point(shape, 1.0)) is Region.NORTH_TROPIC
    assert classify(shape, tropic_point(shape, 1.0, north=False)) is Region.SOUTH_TROPIC


def test_surface_point_rejects_off_surface(shape):
    with pytest.raises(ValueError):
        surface_point(shape, (1.0, 1.0, 1.0))
    sp = surface_point(shape, (1.0, 1.0, 1.0), project=True)
    assert abs(quadric_residual(shape, sp)) < 1e-12


def test_null_directions_equator(shape):
    for t in np.linspace(0, 2 * math.pi, 9):
        p = shape.equator_point(t)
        f = math.sqrt(shape.a * math.sin(t) ** 2 + shape.b * math.cos(t) ** 2)
        base = np.array([-math.sqrt(shape.a) * math.sin(t), math.sqrt(shape.b) * math.cos(t)])
        right, left = null_directions(shape, p)
        for d, sign in ((right, 1), (left, -1)):
            expect = np.array([sign * base[0], sign * base[1], f])
            assert np.allclose(d, expect / np.linalg.norm(expect), atol=1e-14)
            assert abs(mink_dot(d, d)) < 1e-14


def test_null_directions_simple():
    right, left = null_directions(S411, (2, 0, 0))
    assert np.allclose(right, np.array([0, 1, 1]) / math.sqrt(2))
    assert np.allclose(left, np.array([0, -1, 1]) / math.sqrt(2))


def test_null_directions_merge_on_tropic(shape):
    right, left = null_directions(shape, tropic_point(shape, 0.7))
    assert np.linalg.norm(right - left) < 1e-6


def test_null_directions_cap_error():
    with pytest.raises(ValueError):
        null_directions(S411, (0, 0, 1))


def test_curvature_examples():
    a, b, c = 3.0, 2.0, 0.5
    shape = EllipsoidShape(a, b, c)
    assert gauss_curvature(shape, (math.sqrt(a), 0, 0)) == pytest.approx(-a / (b * c))
    assert gauss_curvature(S411, (0, 0, 1)) == pytest.approx(-0.25)
    with pytest.raises(TropicError):
        gauss_curvature(shape, tropic_point(shape, 0.1))


def test_curvature_matches_finite_differences(shape, rng):
    for _ in range(30):
        theta = math.asin(rng.uniform(-1, 1))
        phi = rng.uniform(0, 2 * math.pi)
        p = shape.embed(theta, phi)
        if abs(degeneracy(shape, p)) < 1e-2 or abs(math.cos(theta)) < 0.05:
            continue
        k = gauss_curvature(shape, p)
        assert gauss_curvature_fd(shape, theta, phi) == pytest.approx(k, rel=1e-6)


def test_curvature_blows_up_monotonically(shape):
    phi = 0.4
    th0 = shape.tropic_latitude(phi)
    ks = [abs(gauss_curvature(shape, shape.embed(th0 * (1 - e), phi))) for e in np.geomspace(0.5, 1e-5, 20)]
    assert all(np.diff(ks) > 0)


def test_curvature_negative_off_tropics(shape, rng):
    pts = random_surface_points(shape, rng, 1000, region="offtropic")
    assert all(gauss_curvature(shape, p) < 0 for p in pts)


def test_equivalent_energy_examples(shape, rng):
    assert equivalent_metric_energy(S411, (2, 0, 0), (0, 0, 0)) == 0.0
    assert equivalent_metric_energy(S411, (2, 0, 0), (0, 1, 0)) == pytest.approx(4.0)
    pts = random_surface_points(shape, rng, 10_000, region="offtropic")
    vs = rng.normal(size=pts.shape)
    vals = [equivalent_metric_energy(shape, p, project_to_tangent(shape, p, v)) for p, v in zip(pts, vs)]
    assert min(vals) > 0
    with pytest.raises(TropicError):
        equivalent_metric_energy(shape, tropic_point(shape, 2.0), (1, 0, 0))


def test_normal_orthogonal_to_coordinate_tangents(shape, rng):
    ra, rb, rc = math.sqrt(shape.a), math.sqrt(shape.b), math.sqrt(shape.c)
    worst = 0.0
    for _ in range(1000):
        th, ph = math.asin(rng.uniform(-0.99, 0.99)), rng.uniform(0, 2 * math.pi)
        n = normal(shape, shape.embed(th, ph))
        x_th = np.array([-ra * math.sin(th) * math.cos(ph), -rb * math.sin(th) * math.sin(ph), rc * math.cos(th)])
        x_ph = np.array([-ra * math.cos(th) * math.sin(ph), rb * math.cos(th) * math.cos(ph), 0.0])
        for t in (x_th, x_ph):
            worst = max(worst, abs(mink_dot(n, t)))
    assert worst <= 1e-10


def test_joachimsthal_factorization(shape, rng):
    pts = random_surface_points(shape, rng, 200, region="offtropic")
    for p in pts:
        v = project_to_tangent(shape, p, rng.normal(size=3))
        d = degeneracy(shape, p)
        lhs = joachimsthal(shape, p, v)
        rhs = math.copysign(d * d, d) * equivalent_metric_energy(shape, p, v)
        assert lhs == pytest.approx(rhs, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0, 2 * math.pi), st.floats(0.5, 2.0))
def test_projection_lands_on_surface(theta, phi, scale):
    shape = EllipsoidShape(4.0, 2.0, 1.0)
    p = scale * shape.embed(theta, phi)
    q = project_to_surface(shape, p)
    assert abs(quadric_residual(shape, q)) < 1e-12
