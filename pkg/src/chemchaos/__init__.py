"""Quasi-chemical maps: turn polynomial dynamical systems into chemical ones,
compile them to reaction networks, and check their dynamics numerically."""

from .polysys import (
    AffineMap,
    Complexity,
    Monomial,
    Poly,
    PolySystem,
    SystemFormatError,
    apply_affine,
    complexity,
    evaluate,
    evaluate_jacobian,
    is_chemical,
    is_chemical_monomial,
    jacobian,
)

__all__ = [
    "AffineMap",
    "Complexity",
    "Monomial",
    "Poly",
    "PolySystem",
    "SystemFormatError",
    "apply_affine",
    "complexity",
    "evaluate",
    "evaluate_jacobian",
    "is_chemical",
    "is_chemical_monomial",
    "jacobian",
]
