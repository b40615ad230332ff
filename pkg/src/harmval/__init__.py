"""Zeros of harmonic polynomial fields ``p(z) + conj(q(z))`` and their certification."""
from .errors import (
    ConstantPolynomial,
    DegenerateDraw,
    DegenerateElimination,
    HarmvalError,
    IrregularInstance,
    LeadingPartVanishes,
    NonFiniteInput,
    NonIsolatedZeroSet,
    ZeroOnContour,
)
from .planar import PlanarHarmonicField, SolveReport, bounds, classify, solve
from .poly import ComplexUnivariate, RealMultivariate

__version__ = "0.1.0"

__all__ = [
    "ComplexUnivariate",
    "RealMultivariate",
    "PlanarHarmonicField",
    "SolveReport",
    "solve",
    "classify",
    "bounds",
    "HarmvalError",
    "NonFiniteInput",
    "ConstantPolynomial",
    "DegenerateElimination",
    "NonIsolatedZeroSet",
    "LeadingPartVanishes",
    "ZeroOnContour",
    "IrregularInstance",
    "DegenerateDraw",
]
