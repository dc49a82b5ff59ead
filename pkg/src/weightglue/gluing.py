"""Stratified weight structures, pointwise detection and Hom filtrations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .complexes import ChainMap, RepComplex, extend_by_zero, representable, restrict
from .homotopy_engine import HomGroup, derived_hom, hom_complex, model_map
from .linalg import PresentedModule, hstack, modules_isomorphic, preimage, subquotient
from .poset import Poset, PosetError
from .poset_model import GluingDatum, derived_shriek_closed, open_closed_split, open_inclusion
from .weight_core import (GluedWeightStructure, HeartSpec, NegativityFailure, NegativityViolation,
                          NotInHeart, StupidOnGenerators, WeightStructure, check_negativity)

__all__ = [
    "BadStratification",
    "Stratification",
    "build_glued_ws",
    "singleton_stratification",
    "pointwise_detection",
    "point_shriek",
    "hom_filtration",
    "HomFiltration",
    "integral_part",
    "induced_precomposition",
    "image_in",
]


class BadStratification(PosetError):
    pass


@dataclass
class Stratification:
    """Ordered strata ``S_1, ..., S_n``; each ``S_l`` is open in ``S_l ∪ ... ∪ S_n``."""

    poset: Poset
    strata: list
    hearts: Optional[list] = None   # per stratum: list of RepComplex on the stratum poset

    def __post_init__(self):
        P = self.poset
        seen = []
        for S in self.strata:
            for x in S:
                if x not in P:
                    raise BadStratification(f"unknown element {x!r}")
                if x in seen:
                    raise BadStratification(f"element {x!r} lies in two strata")
                seen.append(x)
        if set(seen) != set(P.elements):
            raise BadStratification("strata do not cover the poset")
        self.strata = [tuple(P.ordered(S)) for S in self.strata]
        for l, S in enumerate(self.strata):
            if not S:
                raise BadStratification(f"stratum {l} is empty")
            rest = [x for T in self.strata[l:] for x in T]
            sub = P.sub(rest)
            if not sub.is_up_set(S):
                raise BadStratification(f"stratum {list(S)} is not open in the union of the later strata")

    def closed_union(self, l: int) -> tuple:
        """``Z_l = S_l ∪ ... ∪ S_n`` (a down-set)."""
        return self.poset.ordered([x for T in self.strata[l:] for x in T])

    def stratum_poset(self, l: int) -> Poset:
        return self.poset.sub(self.strata[l])

    def stratum_hearts(self, ring) -> list:
        if self.hearts is not None:
            return self.hearts
        return [[representable(self.stratum_poset(l), ring, x) for x in self.strata[l]]
                for l in range(len(self.strata))]


def singleton_stratification(P: Poset) -> Stratification:
    """Points ordered from maximal to minimal (each point is open in what remains)."""
    order = sorted(P.elements, key=lambda x: (-len(P.down(x)), P.index[x]))
    return Stratification(P, [[x] for x in order])


def build_glued_ws(strat: Stratification, ring, name: str = "w") -> GluedWeightStructure:
    hearts = strat.stratum_hearts(ring)
    ws = []
    for l, gens in enumerate(hearts):
        res = check_negativity(gens)
        if isinstance(res, NegativityViolation):
            raise NegativityFailure(f"stratum {list(strat.strata[l])}: {res.as_json()}")
        ws.append(StupidOnGenerators(res, name=f"{name}|{''.join(strat.strata[l])}"))
    return GluedWeightStructure(strat.poset, strat.strata, ws, name)


# ---------------------------------------------------------------------------
# pointwise detection


def point_shriek(M: RepComplex, x: str) -> RepComplex:
    """``x^! M``: restriction to {x} of ``i^!`` for the closure ``↓x``."""
    d = open_closed_split(M.poset, M.poset.down(x))
    return restrict(derived_shriek_closed(M, d), [x])


def _point_ws(ring) -> StupidOnGenerators:
    pt = Poset(["*"])
    return pt, StupidOnGenerators(check_negativity([representable(pt, ring, "*")]))


def _to_point(X: RepComplex, pt: Poset) -> RepComplex:
    from .complexes import PosetRep
    x = X.poset.elements[0]
    terms = {i: PosetRep(pt, X.ring, {"*": t.ranks[x]}, {}, check=False) for i, t in X.terms.items()}
    diffs = {i: {"*": dd[x]} for i, dd in X.diffs.items()}
    return RepComplex(pt, X.ring, terms, diffs, check=False)


def pointwise_detection(M: RepComplex, w: WeightStructure, m: int = 0) -> dict:
    """Compare per-point verdicts (stalks for ``<=m``, ``x^!`` for ``>=m``) with ``w``."""
    pt, wp = _point_ws(M.ring)
    rows = []
    for x in M.poset.elements:
        st = _to_point(restrict(M, [x]), pt)
        sh = _to_point(point_shriek(M, x), pt)
        rows.append({"point": x, "le": wp.is_le(st, m), "ge": wp.is_ge(sh, m)})
    le_all = all(r["le"] for r in rows)
    ge_all = all(r["ge"] for r in rows)
    g_le, g_ge = w.is_le(M, m), w.is_ge(M, m)
    return {"points": rows, "pointwise": {"le": le_all, "ge": ge_all},
            "global": {"le": g_le, "ge": g_ge}, "agree": le_all == g_le and ge_all == g_ge}


# ---------------------------------------------------------------------------
# induced maps on Hom groups


def induced_precomposition(f: ChainMap, N: RepComplex, q: int = 0):
    """``(H(target), H(source), T)``: T maps cocycles of ``Hom^q(tgt f, N)`` to ``Hom^q(src f, N)``."""
    phi = model_map(f)
    Ht = hom_complex(f.target, N)
    Hs = hom_complex(f.source, N)
    T = Ht.precompose(phi, Hs, q)
    return Ht.group(q), Hs.group(q), T


def image_in(G_src: HomGroup, G_tgt: HomGroup, T: np.ndarray) -> np.ndarray:
    """Cocycle generators (target coordinates) of the image of ``H(src) -> H(tgt)``."""
    ring = G_tgt.ring
    if G_src.Z.shape[1] == 0:
        return ring.zeros(G_tgt.Z.shape[0], 0)
    return ring.matmul(T, G_src.Z)


# ---------------------------------------------------------------------------
# Hom filtration by strata


def _quotient_map(M: RepComplex, Z: Sequence[str], Mz: RepComplex) -> ChainMap:
    ring = M.ring
    comps = {i: {x: (ring.eye(M.rank(i, x)) if x in Z else ring.zeros(0, M.rank(i, x)))
                 for x in M.poset.elements} for i in M.terms if i in Mz.terms}
    return ChainMap(M, Mz, comps, check=False)


def _sub_map(Ms: RepComplex, S: Sequence[str], Mz: RepComplex) -> ChainMap:
    ring = Mz.ring
    comps = {i: {x: (ring.eye(Mz.rank(i, x)) if x in S else ring.zeros(Mz.rank(i, x), 0))
                 for x in Mz.poset.elements} for i in Ms.terms}
    return ChainMap(Ms, Mz, comps, check=False)


@dataclass
class HomFiltration:
    total: PresentedModule
    stages: list          # F^l as modules
    factors: list         # F^l / F^{l+1}
    stratum_groups: list  # Hom(ext-by-zero of M|S_l, N)
    factors_via_strata: list
    certificates: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        return {"total": list(self.total.invariant_factors),
                "stages": [list(s.invariant_factors) for s in self.stages],
                "factors": [list(f.invariant_factors) for f in self.factors],
                "stratum_groups": [list(g.invariant_factors) for g in self.stratum_groups],
                "certificates": self.certificates}


def hom_filtration(M: RepComplex, N: RepComplex, strat: Stratification, q: int = 0) -> HomFiltration:
    """Filtration of ``Hom^q(M, N)`` by images of ``Hom^q(M_l, N)``, ``M_l = M`` cut to ``Z_l``."""
    P, ring = M.poset, M.ring
    n = len(strat.strata)
    G = hom_complex(M, N).group(q)
    B = G.B
    gens = []
    stage_info = []
    for l in range(n):
        Zl = strat.closed_union(l)
        Ml = extend_by_zero(restrict(M, Zl), P)
        f = _quotient_map(M, Zl, Ml)
        Gt, Gs, T = induced_precomposition(f, N, q)
        gens.append(image_in(Gt, Gs, T))
        stage_info.append((Ml, Gt, T))
    gens.append(ring.zeros(G.Z.shape[0], 0))
    stages = [G.subgroup(g) if g.shape[1] else PresentedModule.zero(ring) for g in gens[:n]]
    factors = []
    for l in range(n):
        den = hstack(ring, gens[l + 1], B, rows=G.Z.shape[0])
        factors.append(subquotient(ring, gens[l], den)[0] if gens[l].shape[1] else PresentedModule.zero(ring))
    # the same factors as subquotients of the stratum groups
    sgroups, via = [], []
    for l in range(n):
        Ml, Gl, T = stage_info[l]
        S = strat.strata[l]
        Ms = extend_by_zero(restrict(M, S), P)
        r = _sub_map(Ms, S, Ml)
        _, Gs, R = induced_precomposition(r, N, q)
        sgroups.append(Gs.module)
        if Gl.Z.shape[1] == 0:
            via.append(PresentedModule.zero(ring))
            continue
        K = preimage(ring, ring.matmul(T, Gl.Z), B)          # coords in Gl generators
        RZ = ring.matmul(R, Gl.Z)
        den = hstack(ring, ring.matmul(RZ, K), Gs.B, rows=RZ.shape[0])
        via.append(subquotient(ring, RZ, den)[0])
    total = G.module
    cert = {"stage_0_is_total": modules_isomorphic(stages[0], total) if n else total.is_zero,
            "factors_match_stratum_subquotients": all(modules_isomorphic(a, b) for a, b in zip(factors, via))}
    if ring.is_domain:
        # over Z/n (not a field) a copy of Z/n can have factors Z/a, Z/b
        cert["ranks_add"] = sum(f.free_rank for f in factors) == total.free_rank
    if total.order is not None and all(f.order is not None for f in factors):
        prod = 1
        for f in factors:
            prod *= f.order
        cert["orders_multiply"] = prod == total.order
    return HomFiltration(total, stages, factors, sgroups, via, cert)


# ---------------------------------------------------------------------------
# integral part


def integral_part(M: RepComplex, datum: GluingDatum, H: RepComplex,
                  w: Optional[WeightStructure] = None, q: int = 0) -> PresentedModule:
    """Image of ``Hom(M, H) -> Hom(j_! j^* M, H)`` (restriction along the counit)."""
    if w is not None and not w.in_heart(M):
        raise NotInHeart("integral part needs a heart object")
    f = open_inclusion(M, datum)
    Gt, Gs, T = induced_precomposition(f, H, q)
    gens = image_in(Gt, Gs, T)
    return Gs.subgroup(gens)
