"""Exact linear algebra over Z, Z[1/p], Z/n, F_p and Q (public entry point)."""
from .linalg import (NotWellDefined, PresentedModule, cokernel_presentation, hstack, in_span,
                     intersect, invariant_factors, kernel_basis, module_image, modules_isomorphic,
                     preimage, smith_normal_form, solve_linear, subquotient, vstack)
from .rings import CoefficientRing, RingError, RingMismatch, UnsupportedRing, parse_ring

__all__ = [
    "CoefficientRing", "RingError", "RingMismatch", "UnsupportedRing", "parse_ring",
    "NotWellDefined", "PresentedModule", "cokernel_presentation", "hstack", "vstack",
    "in_span", "intersect", "invariant_factors", "kernel_basis", "module_image",
    "modules_isomorphic", "preimage", "smith_normal_form", "solve_linear", "subquotient",
]
