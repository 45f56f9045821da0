"""Numerical trace identities for nuclear operators on mixed-norm, variable
exponent and modulation spaces.

All spaces are realized on finite product grids (see
:mod:`nucleartrace.measure_grid`); the theory's sigma-finite measure spaces
are not represented beyond that.
"""
from .measure_grid import (
    Axis,
    Box,
    ProductGrid,
    SampledFunction,
    WeightFunction,
    box_partition,
    integrate,
    interval_grid,
    line_grid,
    torus_grid,
)
from .mixed_norm import Convention, ExponentTuple, dual_exponents, dual_pairing, mixed_norm
from .variable_exponent import VariableExponent, luxemburg_norm, modular

__version__ = "0.1.0"

__all__ = [
    "Axis", "Box", "ProductGrid", "SampledFunction", "WeightFunction", "box_partition", "integrate",
    "interval_grid", "line_grid", "torus_grid", "Convention", "ExponentTuple", "dual_exponents",
    "dual_pairing", "mixed_norm", "VariableExponent", "luxemburg_norm", "modular",
]
