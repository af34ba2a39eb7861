import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_ellipsoid.oval_billiard import (
    DirectionPair,
    Oval,
    chord_involution,
    folded_null_billiard_map,
    orbit,
    rotation_number_oval,
    translation_property_test,
    tuv_map,
)

TWO_PI = 2 * math.pi


def circ(x):
    """Distance on the circle R / 2 pi Z."""
    return abs(math.remainder(x, TWO_PI))


def test_circle_vertical_chord_is_reflection():
    circle = Oval.circle()
    for t in np.linspace(0.1, 6.0, 13):
        assert circ(chord_involution(circle, (0, 1), t) + t) < 1e-12


@pytest.mark.parametrize("oval", [Oval.circle(), Oval.ellipse(4.0, 1.0)])
def test_horizontal_chord(oval):
    for t in np.linspace(0.1, 6.0, 13):
        assert circ(chord_involution(oval, (1, 0), t) - (math.pi - t)) < 1e-12


def test_tangency_is_flagged():
    t, flag = chord_involution(Oval.circle(), (1, 0), math.pi / 2, return_flag=True)
    assert flag and t == pytest.approx(math.pi / 2)
    _, flag = chord_involution(Oval.circle(), (1, 0), 0.3, return_flag=True)
    assert not flag


def test_involution_property():
    rng = np.random.default_rng(0)
    for oval in (Oval.ellipse(4.0, 1.0), Oval.perturbed_ellipse(4.0, 1.0, 0.05)):
        d = (1.0, 0.4)
        for t in rng.uniform(0, TWO_PI, 1000):
            assert circ(chord_involution(oval, d, chord_involution(oval, d, t)) - t) < 1e-10


def test_invalid_inputs():
    with pytest.raises(ValueError):
        DirectionPair((1, 0), (2, 0))
    with pytest.raises(ValueError):
        Oval.ellipse(-1.0, 1.0)
    with pytest.raises(ValueError):
        Oval(lambda t: np.column_stack([np.cos(t), np.sin(2 * t)]),
             lambda t: np.column_stack([-np.sin(t), 2 * np.cos(2 * t)]))
    with pytest.raises(ValueError):
        Oval.from_samples(np.zeros((10, 2)))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, math.pi - 0.1), st.floats(0, math.pi))
def test_circle_map_is_rotation(theta, base):
    dirs = DirectionPair.from_angles(base, base + theta)
    for t in (0.3, 2.0):
        assert circ(tuv_map(Oval.circle(), dirs, t) - (t + 2 * theta)) < 1e-10


@pytest.mark.parametrize("theta", [0.4, 1.0, 2.5])
def test_circle_rotation_number(theta):
    dirs = DirectionPair.from_angles(0.2, 0.2 + theta)
    assert rotation_number_oval(Oval.circle(), dirs, n=2000) == pytest.approx(theta / math.pi, abs=1e-6)


def test_ellipse_rotation_via_affine_map():
    a, c = 4.0, 1.0
    ellipse = Oval.ellipse(a, c)
    dirs = DirectionPair.null()
    # the map (x, z) -> (x / sqrt a, z / sqrt c) takes the ellipse to the unit circle
    mapped = DirectionPair(dirs.u / np.sqrt([a, c]), dirs.v / np.sqrt([a, c]))
    want = mapped.angle / math.pi % 1.0
    assert rotation_number_oval(ellipse, dirs, n=2000) == pytest.approx(want, abs=1e-6)


def test_affine_invariance():
    oval = Oval.perturbed_ellipse(2.0, 1.0, 0.03)
    dirs = DirectionPair.from_angles(0.3, 1.4)
    m = np.array([[1.5, 0.4], [0.1, 0.8]])
    image = oval.affine_image(m, (3.0, -1.0))
    image_dirs = DirectionPair(m @ dirs.u, m @ dirs.v)
    assert rotation_number_oval(image, image_dirs, n=2000) == pytest.approx(
        rotation_number_oval(oval, dirs, n=2000), abs=1e-8)


def test_swapped_directions_invert():
    oval = Oval.perturbed_ellipse(3.0, 1.0, 0.04)
    dirs = DirectionPair.from_angles(0.1, 1.2)
    rho = rotation_number_oval(oval, dirs, n=2000)
    assert rotation_number_oval(oval, dirs.swapped(), n=2000) == pytest.approx((1 - rho) % 1.0, abs=1e-8)


def test_orbit_is_monotone_lift():
    lifted = orbit(Oval.perturbed_ellipse(3.0, 1.0, 0.04), DirectionPair.null(), 0.5, 200)
    steps = np.diff(lifted)
    assert np.all((steps > 0) & (steps < TWO_PI))


def test_translation_property():
    dirs = [DirectionPair.from_angles(0.0, 1.0), DirectionPair.null()]
    assert all(r.passed for r in translation_property_test(Oval.ellipse(4.0, 1.0), dirs))
    reports = translation_property_test(Oval.perturbed_ellipse(4.0, 1.0, 0.05), dirs)
    assert all(not r.passed for r in reports)


def test_spline_oval_matches_ellipse():
    t = np.linspace(0, TWO_PI, 2048, endpoint=False)
    spline = Oval.from_samples(np.column_stack([2 * np.cos(t), np.sin(t)]))
    dirs = DirectionPair.null()
    exact = Oval.ellipse(4.0, 1.0)
    for s in (0.4, 2.2, 5.0):
        assert circ(tuv_map(spline, dirs, s) - tuv_map(exact, dirs, s)) < 1e-8


def test_folded_billiard_is_monotone():
    ts = np.linspace(0.05, TWO_PI - 0.05, 60)
    images = np.array([folded_null_billiard_map(4.0, 1.0, t) for t in ts])
    assert np.all(np.diff(images) > 0)
