"""Glued weight structures on complexes of sheaves over finite posets.

Exact computations over Z, Z[1/p], Z/n, prime fields and Q: gluing data
(recollements), weight structures glued along stratifications, weight
decompositions, weight complexes, weight spectral sequences, Euler
characteristics and Hom filtrations.
"""
from .rings import CoefficientRing, parse_ring
from .poset import Poset, chain_poset, NotDownSet, PosetError
from .complexes import (ChainMap, Cone, PosetRep, RepComplex, constant_sheaf, direct_sum, dual,
                        extend_by_zero, point_sheaf, representable, restrict, shift)
from .homotopy_engine import derived_hom, is_contractible, is_homotopy_equivalence, model
from .poset_model import GluingDatum, derived_pushforward_open, gluing_triangle, open_closed_split, verify_gluing_axioms
from .weight_core import (ZERO_OBJECT, GluedWeightStructure, StupidOnGenerators, WeightRange, WeightStructure,
                          membership, weight_decompose, weight_range)
from .gluing import Stratification, build_glued_ws, hom_filtration, integral_part, singleton_stratification
from .weight_invariants import (euler_class, k0_audit, weight_complex, weight_filtration, weight_range_via_t,
                                weight_spectral_sequence)

__version__ = "0.1.0"
