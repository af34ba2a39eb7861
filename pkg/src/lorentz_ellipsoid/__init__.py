"""Geodesics on the ellipsoid x^2/a + y^2/b + z^2/c = 1 in Minkowski 3-space.

The metric is dx^2 + dy^2 - dz^2.  The equatorial belt is space-like, the
polar caps are time-like, and the two tropics between them are where the
induced metric degenerates.
"""
from .mink_core import CausalClass, MinkVec3, causal_class, mink_cross, mink_dot, mink_norm2
from .surface import EllipsoidShape, Region, TropicError, classify, degeneracy, gauss_curvature
from .geodesic_flow import (
    EventKind,
    GeodesicState,
    GeodesicTrace,
    IntegrationError,
    IntegratorOptions,
    integrate,
    integrate_with_reflections,
    make_state,
    reflect_off_tropic,
)
from .null_poncelet import PonceletMap, closure_search, poncelet_map, rotation_number
from .oval_billiard import DirectionPair, Oval, chord_involution, rotation_number_oval, tuv_map

__version__ = "0.1.0"

__all__ = [
    "CausalClass", "MinkVec3", "causal_class", "mink_cross", "mink_dot", "mink_norm2",
    "EllipsoidShape", "Region", "TropicError", "classify", "degeneracy", "gauss_curvature",
    "EventKind", "GeodesicState", "GeodesicTrace", "IntegrationError", "IntegratorOptions",
    "integrate", "integrate_with_reflections", "make_state", "reflect_off_tropic",
    "PonceletMap", "closure_search", "poncelet_map", "rotation_number",
    "DirectionPair", "Oval", "chord_involution", "rotation_number_oval", "tuv_map",
]
