"""Toric Kahler-Ricci flow laboratory on reflexive moment polytopes."""

from toricflow.polytope import (
    PiecewiseLinearConvex,
    ReflexivePolytope,
    builtin,
    builtin_names,
    donaldson_functional,
    futaki_character,
    moments,
    validate,
)

__version__ = "0.1.0"
