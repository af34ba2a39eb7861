import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lorentz_ellipsoid.null_poncelet import (
    EquatorCoord,
    NullCoordinate,
    NullSide,
    PonceletMap,
    area_form_density,
    birkhoff_rotation_number,
    closure_search,
    decay_exponent,
    h_form,
    h_form_residual,
    joachimsthal_chart,
    joachimsthal_chart_oracle,
    rotation_estimate,
    rotation_number,
    state_from_chart,
)
from lorentz_ellipsoid.surface import EllipsoidShape

S411 = EllipsoidShape(4.0, 1.0 + 1e-12, 1.0)
TWO_PI = 2 * math.pi
# shift constant of T for (4, 2, 1), frozen from the long-orbit average
DELTA_421 = 0.0808236600
# c on the family (4, 2, c) with shift 1/3, frozen from the closure search
CLOSURE_C = 5.175338771942


def test_chart_validation():
    with pytest.raises(ValueError):
        EquatorCoord(0.0)
    with pytest.raises(ValueError):
        EquatorCoord(0.0, tau=1.0, side=NullSide.RIGHT)
    with pytest.raises(ValueError):
        EquatorCoord(0.0, tau=math.inf)
    with pytest.raises(ValueError):
        EquatorCoord.from_angle(0.0, 0.3)
    assert EquatorCoord.from_angle(0.2, math.pi / 2).tau == 0.0
    assert EquatorCoord.from_angle(0.2, math.pi / 3).tau == pytest.approx(1 / math.sqrt(2))


def test_joachimsthal_chart_examples(shape):
    f2 = area_form_density(shape, 0.7) ** 2
    assert joachimsthal_chart(shape, EquatorCoord(0.7, 0.0)) == pytest.approx(f2 / 8.0)
    assert joachimsthal_chart(S411, EquatorCoord(0.0, 1.0)) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        joachimsthal_chart(shape, EquatorCoord(0.0, side=NullSide.LEFT))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, TWO_PI), st.floats(-50, 50))
def test_joachimsthal_chart_matches_state(t, tau):
    shape = EllipsoidShape(4.0, 2.0, 1.0)
    q = EquatorCoord(t, tau)
    want = joachimsthal_chart_oracle(shape, q)
    assert joachimsthal_chart(shape, q) == pytest.approx(want, rel=1e-12)
    assert joachimsthal_chart(shape, q) >= area_form_density(shape, t) ** 2 / 8.0 * (1 - 1e-15)


def test_chart_state_is_timelike(shape):
    s = state_from_chart(shape, EquatorCoord(1.0, 3.0))
    assert s.energy == pytest.approx(-1.0)
    n = state_from_chart(shape, EquatorCoord(1.0, side=NullSide.RIGHT))
    assert n.energy == 0.0


def test_area_density_examples(shape):
    assert area_form_density(shape, 0.0) == pytest.approx(math.sqrt(2))
    assert area_form_density(shape, math.pi / 2) == pytest.approx(2.0)
    rev = EllipsoidShape(3.0, 3.0 - 1e-15, 1.0)
    assert np.ptp([area_form_density(rev, t) for t in np.linspace(0, 6, 13)]) < 1e-7


def test_h_form_examples(shape):
    assert h_form(shape, 0.0) == pytest.approx(math.sqrt(2 / 3))
    assert h_form(shape, math.pi / 2) == pytest.approx(math.sqrt(4 / 5))
    assert np.all(h_form(shape, np.linspace(0, TWO_PI, 100)) > 0)


def test_h_form_identity_decay(shape):
    taus = [1e2, 1e3, 1e4]
    for t in (0.3, 1.9):
        res = [h_form_residual(shape, t, tau) for tau in taus]
        assert decay_exponent(taus, res) >= 1.95


def test_s_coordinate(shape):
    s = NullCoordinate(shape)
    assert s(0.0) == pytest.approx(0.0, abs=1e-15)
    assert s(TWO_PI) == pytest.approx(1.0, abs=1e-13)
    ts = np.linspace(0, TWO_PI, 500, endpoint=False)
    assert np.all(np.diff([s(t) for t in ts]) > 0)
    total = quad(lambda u: h_form(shape, u), 0, TWO_PI, epsabs=1e-14, limit=200)[0]
    for t in (0.4, 2.5, 5.9):
        want = quad(lambda u: h_form(shape, u), 0, t, epsabs=1e-14, limit=200)[0] / total
        assert s(t) == pytest.approx(want, abs=1e-12)
        assert s.inverse(s(t)) == pytest.approx(t, abs=1e-11)


def test_s_coordinate_revolution():
    s = NullCoordinate(EllipsoidShape(3.0, 3.0 - 1e-12, 1.0))
    for t in (0.5, 3.0):
        assert s(t) == pytest.approx(t / TWO_PI, abs=1e-10)


def test_revolution_map_is_rotation():
    tmap = PonceletMap(EllipsoidShape(3.0, 3.0 - 1e-12, 1.0))
    gaps = [tmap.lift(t) - t for t in np.linspace(0, TWO_PI, 6, endpoint=False)]
    assert np.ptp(gaps) < 1e-9


def test_map_is_monotone(shape):
    tmap = PonceletMap(shape)
    ts = np.linspace(0, TWO_PI, 40, endpoint=False)
    lifts = np.array([tmap.lift(t) for t in ts])
    assert np.all(np.diff(lifts) > 0)
    assert np.all((lifts - ts > 0) & (lifts - ts < TWO_PI))


def test_shift_is_constant(shape):
    est = rotation_estimate(shape, samples=32)
    assert est.spread < 1e-6
    assert est.delta == pytest.approx(DELTA_421, abs=1e-9)
    assert rotation_number(shape, samples=8) == pytest.approx(DELTA_421, abs=1e-9)


def test_southern_map_same_shift(shape):
    south = PonceletMap(shape, north=False)
    north = PonceletMap(shape)
    for t in (0.1, 2.2, 4.0):
        assert (south.shift(t) - north.shift(t)) == pytest.approx(0.0, abs=1e-9)


def test_birkhoff_agrees(shape):
    assert birkhoff_rotation_number(shape, n=1000) == pytest.approx(DELTA_421, abs=1e-6)


def test_h_measure_invariant(shape):
    tmap = PonceletMap(shape)
    s = tmap.coordinate
    rng = np.random.default_rng(2)
    for _ in range(50):
        t1, t2 = np.sort(rng.uniform(0, TWO_PI, 2))
        before = s(t2) - s(t1)
        after = s(tmap.lift(t2)) - s(tmap.lift(t1))
        assert after == pytest.approx(before, abs=1e-6)


def test_closure_search():
    res = closure_search(lambda c: EllipsoidShape(4.0, 2.0, c), 0.01, 10.0, 3, 1)
    assert res.found, res.message
    assert res.parameter == pytest.approx(CLOSURE_C, abs=1e-8)
    assert res.max_return_error <= 1e-6
    missing = closure_search(lambda c: EllipsoidShape(4.0, 2.0, c), 0.01, 10.0, 10, 9, probes=6)
    assert not missing.found
    with pytest.raises(ValueError):
        closure_search(lambda c: EllipsoidShape(4.0, 2.0, c), 0.01, 10.0, 0, 1)
