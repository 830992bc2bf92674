"""Lattice NLS shape fields, their symbolic coding and complexity, and the macrostate chain."""

from .field import (
    ComplexField,
    LatticeParams,
    Nonlinearity,
    PhaseField,
    ShapeField,
    charge,
    internal_energy,
    make_nonlinearity_cubic_like,
)

__all__ = [
    "ComplexField",
    "LatticeParams",
    "Nonlinearity",
    "PhaseField",
    "ShapeField",
    "charge",
    "internal_energy",
    "make_nonlinearity_cubic_like",
]
