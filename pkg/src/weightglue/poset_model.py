"""Open/closed decompositions of a finite poset and the six gluing functors.

Open sets are up-sets.  For a down-set Z with complement U:

* ``i^*``, ``j^* = j^!`` are restrictions,
* ``i_* = i_!`` and ``j_!`` are extensions by zero,
* ``Rj_*`` is the nerve (homotopy limit) pushforward,
* ``i^!`` is the Z-restriction of the fiber of ``M -> Rj_* j^* M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .complexes import (ChainMap, Cone, PartMismatch, PosetRep, RepComplex, cocone,
                        extend_by_zero, mapping_cone, restrict)
from .homotopy_engine import is_contractible, is_homotopy_equivalence
from .poset import NotDownSet, Poset

__all__ = [
    "GluingDatum",
    "open_closed_split",
    "NotDownSet",
    "PartMismatch",
    "derived_pushforward_open",
    "pushforward_unit",
    "pushforward_counit",
    "derived_shriek_closed",
    "shriek_fiber",
    "gluing_triangle",
    "GluingTriangle",
    "verify_gluing_axioms",
    "restrict",
    "extend_by_zero",
]


@dataclass(frozen=True)
class GluingDatum:
    ambient: Poset
    closed_part: tuple
    open_part: tuple

    @property
    def Z(self) -> Poset:
        return self.ambient.sub(self.closed_part)

    @property
    def U(self) -> Poset:
        return self.ambient.sub(self.open_part)

    # the four exact functors
    def i_upper(self, M: RepComplex) -> RepComplex:
        return restrict(M, self.closed_part)

    def j_upper(self, M: RepComplex) -> RepComplex:
        return restrict(M, self.open_part)

    def i_lower(self, X: RepComplex) -> RepComplex:
        return extend_by_zero(_on(X, self.Z), self.ambient)

    def j_shriek(self, Y: RepComplex) -> RepComplex:
        return extend_by_zero(_on(Y, self.U), self.ambient)

    def j_lower(self, Y: RepComplex) -> RepComplex:
        return derived_pushforward_open(Y, self)

    def i_shriek(self, M: RepComplex) -> RepComplex:
        return derived_shriek_closed(M, self)


def _on(X: RepComplex, part: Poset) -> RepComplex:
    if X.poset != part:
        raise PartMismatch(f"complex lives on {list(X.poset.elements)}, expected {list(part.elements)}")
    return X


def open_closed_split(P: Poset, Z: Iterable[str]) -> GluingDatum:
    Z = P.ordered(Z)
    if not P.is_down_set(Z):
        raise NotDownSet(f"{list(Z)} is not closed under predecessors")
    U = tuple(x for x in P.elements if x not in Z)
    return GluingDatum(P, tuple(Z), U)


# ---------------------------------------------------------------------------
# Rj_*


def _nerve_keys(G: RepComplex, datum: GluingDatum, x: str):
    """Summands ``(j, chain, b)`` of ``(Rj_* G)^n(x)``, grouped by total degree n."""
    P = datum.ambient
    above = [u for u in datum.open_part if P.leq(x, u)]
    chains = datum.U.chains(above) if above else ()
    out: dict[int, list] = {}
    for j in G.terms:
        for c in chains:
            for b in range(G.rank(j, c[-1])):
                out.setdefault(j + len(c) - 1, []).append((j, c, b))
    return out


def derived_pushforward_open(G: RepComplex, datum: GluingDatum) -> RepComplex:
    """``Rj_* G``: stalk at x is the total nerve complex of ``U_{>=x}`` with coefficients in G."""
    G = _on(G, datum.U)
    ring, P = G.ring, datum.ambient
    keys = {x: _nerve_keys(G, datum, x) for x in P.elements}
    index = {x: {n: {k: r for r, k in enumerate(ks)} for n, ks in keys[x].items()} for x in P.elements}
    degs = sorted(set(n for x in P.elements for n in keys[x]))
    terms = {}
    for n in degs:
        ranks = {x: len(keys[x].get(n, ())) for x in P.elements}
        maps = {}
        for x, y in P.strict_pairs:
            a = ring.zeros(ranks[y], ranks[x])
            ix = index[x].get(n, {})
            for r, k in enumerate(keys[y].get(n, ())):
                a[r, ix[k]] = 1
            maps[(x, y)] = a
        terms[n] = PosetRep(P, ring, ranks, maps, check=False)
    diffs = {}
    for n in degs:
        if n + 1 not in terms:
            continue
        dd = {}
        for x in P.elements:
            src = keys[x].get(n, [])
            tgt = index[x].get(n + 1, {})
            a = ring.zeros(len(tgt), len(src))
            above = [u for u in datum.open_part if P.leq(x, u)]
            for col, (j, c, b) in enumerate(src):
                k = len(c) - 1
                # nerve coface: insert one element anywhere in the chain
                for pos in range(k + 2):
                    lo = c[pos - 1] if pos > 0 else None
                    hi = c[pos] if pos <= k else None
                    for v in above:
                        if lo is not None and not P.less(lo, v):
                            continue
                        if hi is not None and not P.less(v, hi):
                            continue
                        nc = c[:pos] + (v,) + c[pos:]
                        sign = -1 if pos % 2 else 1
                        if pos == k + 1:
                            tr = G.trans(j, c[-1], v)
                            for b2 in range(tr.shape[0]):
                                if tr[b2, b] != 0:
                                    a[tgt[(j, nc, b2)], col] += sign * tr[b2, b]
                        else:
                            a[tgt[(j, nc, b)], col] += sign
                dg = G.d(j, c[-1])
                vs = -1 if k % 2 else 1
                for b2 in range(dg.shape[0]):
                    if dg[b2, b] != 0:
                        a[tgt[(j + 1, c, b2)], col] += vs * dg[b2, b]
            dd[x] = ring.reduce(a)
        diffs[n] = dd
    out = RepComplex(P, ring, terms, diffs, check=False)
    out._cache["nerve_keys"] = keys
    return out


def pushforward_unit(M: RepComplex, datum: GluingDatum) -> ChainMap:
    """``M -> Rj_* j^* M``: a vector goes to its images on the one-element chains."""
    G = datum.j_upper(M)
    T = derived_pushforward_open(G, datum)
    keys = T._cache["nerve_keys"]
    ring = M.ring
    comps = {}
    for n in M.terms:
        if n not in T.terms:
            continue
        cc = {}
        for x in datum.ambient.elements:
            a = ring.zeros(T.rank(n, x), M.rank(n, x))
            for r, (j, c, b) in enumerate(keys[x].get(n, ())):
                if len(c) == 1:
                    a[r, :] = M.trans(n, x, c[0])[b, :]
            cc[x] = a
        comps[n] = cc
    return ChainMap(M, T, comps, check=False)


def pushforward_counit(G: RepComplex, datum: GluingDatum) -> ChainMap:
    """The equivalence ``G -> j^* Rj_* G`` inverse to the counit.

    Evaluation at the least chain is natural only up to homotopy, so the
    counit is certified through this honest section: ``j^*`` of the unit of
    ``j_! G``.  Being an equivalence, it identifies the counit as one too.
    """
    unit = pushforward_unit(datum.j_shriek(G), datum)
    ring = G.ring
    S = datum.j_upper(unit.target)
    comps = {n: {u: unit.at(n, u) for u in datum.open_part} for n in G.terms if n in S.terms}
    return ChainMap(G, S, comps, check=False)


# ---------------------------------------------------------------------------
# i^!


def shriek_fiber(M: RepComplex, datum: GluingDatum) -> tuple[RepComplex, ChainMap, ChainMap]:
    """``F = fib(M -> Rj_* j^* M)`` with its maps ``F -> M`` and the unit."""
    unit = pushforward_unit(M, datum)
    F, p = cocone(unit)
    return F, p, unit


def derived_shriek_closed(M: RepComplex, datum: GluingDatum) -> RepComplex:
    """``i^! M = i^* fib(M -> Rj_* j^* M)``."""
    F, _, _ = shriek_fiber(M, datum)
    return restrict(F, datum.closed_part)


def closed_unit(F: RepComplex, datum: GluingDatum) -> ChainMap:
    """``F -> i_* i^* F`` (identity on Z, zero on U)."""
    T = datum.i_lower(datum.i_upper(F))
    ring = F.ring
    comps = {}
    for n in F.terms:
        if n not in T.terms:
            continue
        comps[n] = {x: (ring.eye(F.rank(n, x)) if x in datum.closed_part
                        else ring.zeros(0, F.rank(n, x))) for x in datum.ambient.elements}
    return ChainMap(F, T, comps, check=False)


def open_inclusion(M: RepComplex, datum: GluingDatum) -> ChainMap:
    """``j_! j^* M -> M`` (identity on U)."""
    S = datum.j_shriek(datum.j_upper(M))
    ring = M.ring
    comps = {}
    for n in S.terms:
        comps[n] = {x: (ring.eye(M.rank(n, x)) if x in datum.open_part
                        else ring.zeros(M.rank(n, x), 0)) for x in datum.ambient.elements}
    return ChainMap(S, M, comps, check=False)


# ---------------------------------------------------------------------------
# triangles


@dataclass
class GluingTriangle:
    side: str
    objects: tuple            # (first, M, third)
    first_map: object         # ChainMap, or (roof equivalence, map) for the upper side
    second_map: ChainMap
    cone: Cone                # cone of the honest first map
    comparison: ChainMap      # cone -> third object
    certificates: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(self.certificates.values())

    def connecting_map(self) -> ChainMap:
        """Roof leg ``cone -> first[1]`` (the third object is equivalent to the cone)."""
        return self.cone.projection


def gluing_triangle(M: RepComplex, datum: GluingDatum, side: str = "lower") -> GluingTriangle:
    """``j_!j^*M -> M -> i_*i^*M`` (lower) or ``i_*i^!M -> M -> Rj_*j^*M`` (upper)."""
    ring = M.ring
    if side == "lower":
        inc = open_inclusion(M, datum)
        q = closed_unit(M, datum)
        c = Cone(inc)
        C = c.complex
        T = q.target
        comps = {}
        for n in C.terms:
            if n not in T.terms:
                continue
            cc = {}
            for x in datum.ambient.elements:
                a = ring.zeros(T.rank(n, x), C.rank(n, x))
                off = inc.source.rank(n + 1, x)
                a[:, off:] = q.at(n, x)
                cc[x] = a
            comps[n] = cc
        cmp = ChainMap(C, T, comps, check=False)
        cert = {"first_map_is_chain_map": _valid(inc), "second_map_is_chain_map": _valid(q),
                "comparison_is_chain_map": _valid(cmp),
                "cone_equivalent_to_third": is_homotopy_equivalence(cmp),
                "composite_zero": _composite_zero(inc, q)}
        return GluingTriangle("lower", (inc.source, M, T), inc, q, c, cmp, cert)
    if side != "upper":
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    F, p, unit = shriek_fiber(M, datum)
    e = closed_unit(F, datum)
    c = Cone(p)
    C = c.complex
    T = unit.target
    # cone(p)^n = F^{n+1} + M^n with F^{n+1} = M^{n+1} + T^n
    comps = {}
    for n in C.terms:
        if n not in T.terms:
            continue
        cc = {}
        for x in datum.ambient.elements:
            a = ring.zeros(T.rank(n, x), C.rank(n, x))
            m1, t0, m0 = M.rank(n + 1, x), T.rank(n, x), M.rank(n, x)
            a[:, m1:m1 + t0] = ring.scale(-1, ring.eye(t0))
            a[:, m1 + t0:] = unit.at(n, x)
            cc[x] = a
        comps[n] = cc
    cmp = ChainMap(C, T, comps, check=False)
    cert = {"fiber_restricts_to_closed": is_homotopy_equivalence(e),
            "first_map_is_chain_map": _valid(p), "second_map_is_chain_map": _valid(unit),
            "comparison_is_chain_map": _valid(cmp),
            "cone_equivalent_to_third": is_homotopy_equivalence(cmp),
            "composite_zero": _composite_nullhomotopic(p, unit)}
    return GluingTriangle("upper", (e.target, M, T), (e, p), unit, c, cmp, cert)


def _valid(f: ChainMap) -> bool:
    try:
        f.validate()
        return True
    except ValueError:
        return False


def _composite_zero(f: ChainMap, g: ChainMap) -> bool:
    ring = f.ring
    return all(not np.any(ring.matmul(g.at(n, x), f.at(n, x)) != 0)
               for n in f.source.terms for x in f.poset.elements)


def _composite_nullhomotopic(p: ChainMap, unit: ChainMap) -> bool:
    # unit o p on the fiber is null-homotopic via the T-component; check as a
    # cone test on a map into the contractible cone of the identity is overkill,
    # so verify d h + h d = unit o p with h the projection F^n -> T^{n-1}.
    ring = p.ring
    F = p.source
    for n in F.terms:
        for x in p.poset.elements:
            up = ring.matmul(unit.at(n, x), p.at(n, x))
            m0 = p.target.rank(n, x)
            t = unit.target
            h_n = ring.zeros(t.rank(n - 1, x), F.rank(n, x))
            h_n[:, m0:] = ring.eye(t.rank(n - 1, x))
            h_n1 = ring.zeros(t.rank(n, x), F.rank(n + 1, x))
            h_n1[:, p.target.rank(n + 1, x):] = ring.eye(t.rank(n, x))
            lhs = ring.add(ring.matmul(t.d(n - 1, x), h_n), ring.matmul(h_n1, F.d(n, x)))
            if not (np.array_equal(lhs, up) or np.array_equal(ring.scale(-1, lhs), up)):
                return False
    return True


# ---------------------------------------------------------------------------
# axiom audit


def verify_gluing_axioms(datum: GluingDatum, samples: list[RepComplex]) -> dict:
    """Check the recollement axioms on each sample; returns a JSON-ready report."""
    rows = []
    for k, M in enumerate(samples):
        Y = datum.j_upper(M)
        X = datum.i_upper(M)
        checks = {}
        checks["i_upper_j_shriek_strict_zero"] = datum.i_upper(datum.j_shriek(Y)).is_zero_complex()
        checks["i_shriek_j_lower_acyclic"] = is_contractible(datum.i_shriek(datum.j_lower(Y)))
        checks["i_upper_i_lower_identity"] = datum.i_upper(datum.i_lower(X)).equals(X)
        checks["i_shriek_i_lower_identity"] = _same_values(datum.i_shriek(datum.i_lower(X)), X)
        checks["j_upper_j_shriek_identity"] = datum.j_upper(datum.j_shriek(Y)).equals(Y)
        checks["j_upper_j_lower_counit"] = is_homotopy_equivalence(pushforward_counit(Y, datum))
        lo = gluing_triangle(M, datum, "lower")
        up = gluing_triangle(M, datum, "upper")
        checks["lower_triangle"] = lo.certified
        checks["upper_triangle"] = up.certified
        rows.append({"sample": M.name or f"#{k}", "checks": checks, "passed": all(checks.values())})
    return {"closed_part": list(datum.closed_part), "open_part": list(datum.open_part),
            "samples": rows, "passed": all(r["passed"] for r in rows)}


def _same_values(A: RepComplex, B: RepComplex) -> bool:
    """Equality up to dropping zero terms (the fiber of a map to 0 is the source)."""
    return A.equals(B)
