"""Seeded random objects, maps and corpora for the property suites."""
from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from .complexes import ChainMap, Cone, RepComplex, constant_sheaf, direct_sum, shift
from .homotopy_engine import hom_class_to_chainmap, hom_complex, model
from .poset import Poset

__all__ = [
    "convex_subsets",
    "random_block",
    "random_derived_map",
    "random_object",
    "random_corpus",
    "small_enough",
    "negative_side_object",
    "positive_side_object",
    "orthogonality_pairs",
    "random_cone_triangle",
]

MAX_RANK = 3
MAX_WIDTH = 3


def convex_subsets(P: Poset) -> list:
    key = "_convex"
    if not hasattr(P, key):
        out = []
        for k in range(1, len(P.elements) + 1):
            for S in itertools.combinations(P.elements, k):
                if P.is_convex(S):
                    out.append(S)
        setattr(P, key, out)
    return getattr(P, key)


def small_enough(M: RepComplex, rank: int = MAX_RANK, width: int = MAX_WIDTH) -> bool:
    """Pointwise rank at most ``rank`` in each degree, at most ``width`` nonzero degrees."""
    amp = M.amplitude
    if amp is None:
        return True
    if amp[1] - amp[0] + 1 > width:
        return False
    return all(M.rank(i, x) <= rank for i in M.terms for x in M.poset.elements)


def random_block(P: Poset, ring, rng, degrees=(-1, 0, 1)) -> RepComplex:
    subs = convex_subsets(P)
    S = subs[rng.integers(len(subs))]
    k = int(rng.choice(degrees))
    return constant_sheaf(P, ring, S, k, name=f"R{{{''.join(S)}}}[{-k}]")


def random_derived_map(X: RepComplex, Y: RepComplex, rng, bound: int = 2) -> ChainMap:
    """A random degree-0 class of ``Hom(X, Y)``, realized on the minimal model of X."""
    H = hom_complex(X, Y)
    G = H.group(0)
    ring = Y.ring
    Z = G.Z
    c = ring.vector([int(v) for v in rng.integers(-bound, bound + 1, size=Z.shape[1])])
    v = ring.matmul(Z, c.reshape(-1, 1))[:, 0] if Z.shape[1] else ring.vector([0] * H.dim(0))
    return hom_class_to_chainmap(model(X).P, Y, v, H)


def random_object(P: Poset, ring, rng, cones: int = 2, degrees=(-1, 0, 1), tries: int = 40) -> RepComplex:
    """Blocks, direct sums and cones of random derived maps, filtered to small size."""
    for _ in range(tries):
        M = random_block(P, ring, rng, degrees)
        for _ in range(int(rng.integers(0, cones + 1))):
            X = random_block(P, ring, rng, degrees)
            kind = rng.integers(3)
            if kind == 0:
                C = direct_sum(M, X)
            elif kind == 1:
                C = Cone(random_derived_map(X, M, rng)).complex
            else:
                C = Cone(random_derived_map(M, X, rng)).complex
            if small_enough(C):
                M = C
        if small_enough(M):
            M.name = M.name or "random"
            return M
    return random_block(P, ring, rng, degrees)


def random_corpus(P: Poset, ring, n: int, seed: int = 0, **kw) -> list:
    rng = np.random.default_rng(seed)
    return [random_object(P, ring, rng, **kw) for _ in range(n)]


# ---------------------------------------------------------------------------
# objects on a chosen side of a weight structure


def _side_object(gens: Sequence[RepComplex], shifts: Sequence[int], shifts_src: Sequence[int], rng,
                 cones: int) -> RepComplex:
    def pick(sh):
        g = gens[rng.integers(len(gens))]
        return shift(g, int(rng.choice(sh)))

    M = pick(shifts)
    for _ in range(int(rng.integers(0, cones + 1))):
        A = pick(shifts_src)
        if rng.integers(2):
            C = Cone(random_derived_map(A, M, rng)).complex
        else:
            C = direct_sum(M, pick(shifts))
        if small_enough(C, rank=4, width=4):
            M = C
    return M


def negative_side_object(w, rng, cones: int = 4) -> RepComplex:
    """An object of ``w <= 0``: cones of maps from ``w <= -1`` pieces into ``w <= 0`` ones."""
    return _side_object(w.negative, (0, -1, -2), (-1, -2), rng, cones)


def positive_side_object(w, rng, cones: int = 4) -> RepComplex:
    """An object of ``w >= 0`` built from positive tests ``t[i]``, ``i >= 0``."""
    return _side_object(w.positive, (0, 1, 2), (0, 1), rng, cones)


def orthogonality_pairs(w, n: int, seed: int = 0, cones: int = 4):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield negative_side_object(w, rng, cones), positive_side_object(w, rng, cones)


def random_cone_triangle(P: Poset, ring, rng) -> tuple:
    """``(A, B, C)`` with ``A -> B -> C = cone`` for a random derived map."""
    A = random_object(P, ring, rng, cones=1)
    B = random_object(P, ring, rng, cones=1)
    f = random_derived_map(A, B, rng)
    return f.source, B, Cone(f).complex
