"""Weight structures on the derived category of a finite poset.

Weight conventions: a heart object placed in cochain degree ``-i`` has
weight ``i``, so ``M[1]`` has weights one higher than M.  For a weight
structure with negative-side tests ``g`` and positive-side tests ``t``::

    M in C_{w>=a}  iff  Hom^q(g, M) = 0 for all q >= 1 - a
    M in C_{w<=b}  iff  Hom^q(M, t) = 0 for all q >= b + 1

``Hom^q(M, t)`` is evaluated as ``Hom^q(D t, D M)`` (pointwise duality), so
only the small test objects are ever resolved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .complexes import (ChainMap, Cone, PosetMismatch, RepComplex, cocone, compose, dual,
                        extend_by_zero, restrict, shift)
from .homotopy_engine import (ProjComplex, compose_classes, derived_hom, hom_complex,
                              is_contractible, is_homotopy_equivalence, model)
from .linalg import PresentedModule, hstack, subquotient
from .poset import Poset
from .poset_model import (GluingDatum, closed_unit, open_closed_split, open_inclusion,
                          derived_pushforward_open, shriek_fiber)

__all__ = [
    "WeightError",
    "NotInHeart",
    "NegativityFailure",
    "DecompositionUnavailable",
    "ZeroObject",
    "ZERO_OBJECT",
    "WeightRange",
    "HeartSpec",
    "NegativityViolation",
    "check_negativity",
    "WeightStructure",
    "StupidOnGenerators",
    "GluedWeightStructure",
    "TransportedWeightStructure",
    "Decomposition",
    "membership",
    "weight_decompose",
    "weight_range",
    "factor_heart_hom",
    "check_weight_exactness",
    "top_nonzero_degree",
]


class WeightError(ValueError):
    pass


class NotInHeart(WeightError):
    pass


class NegativityFailure(WeightError):
    pass


class DecompositionUnavailable(WeightError):
    pass


class ZeroObject:
    """Weight range of a zero object."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "ZeroObject"

    def as_json(self):
        return "zero"


ZERO_OBJECT = ZeroObject()


@dataclass(frozen=True)
class WeightRange:
    lo: int
    hi: int

    def as_json(self):
        return [self.lo, self.hi]

    def __iter__(self):
        return iter((self.lo, self.hi))


def top_nonzero_degree(M: RepComplex, N: RepComplex, floor: Optional[int] = None) -> Optional[int]:
    """Largest q with ``Hom^q(M, N) != 0`` (searching down to ``floor``), or None."""
    gh = derived_hom(M, N)
    lo, hi = gh.qrange
    if floor is not None:
        lo = max(lo, floor)
    for q in range(hi, lo - 1, -1):
        if not gh[q].is_zero:
            return q
    return None


# ---------------------------------------------------------------------------
# negativity


@dataclass
class NegativityViolation:
    source: int
    target: int
    shift: int
    group: PresentedModule

    def as_json(self):
        return {"source": self.source, "target": self.target, "shift": self.shift,
                "group": list(self.group.invariant_factors)}


@dataclass
class HeartSpec:
    generators: list
    negativity_certified: bool = False
    names: list = field(default_factory=list)

    @property
    def poset(self) -> Poset:
        return self.generators[0].poset

    @property
    def ring(self):
        return self.generators[0].ring


def check_negativity(gens: Sequence[RepComplex], names: Optional[Sequence[str]] = None):
    """HeartSpec if ``Hom(g, g'[i]) = 0`` for all i > 0, else the first violation.

    The derived Hom groups are computed in every degree where they can be
    nonzero, which covers the window amplitude + chain length + 1.
    """
    gens = list(gens)
    for g in gens[1:]:
        gens[0].same_category(g)
    for a, g in enumerate(gens):
        for b, h in enumerate(gens):
            gh = derived_hom(g, h)
            lo, hi = gh.qrange
            for q in range(max(lo, 1), hi + 1):
                if not gh[q].is_zero:
                    return NegativityViolation(a, b, q, gh[q])
    names = list(names) if names is not None else [g.name or f"g{k}" for k, g in enumerate(gens)]
    return HeartSpec(gens, True, names)


# ---------------------------------------------------------------------------
# weight structures


class WeightStructure:
    """Base class: orthogonality oracles from two families of test objects."""

    kind = "abstract"

    def __init__(self, poset: Poset, ring, negative: list, positive: list, name: str = "w"):
        self.poset = poset
        self.ring = ring
        self.negative = list(negative)
        self.positive = list(positive)
        self._positive_dual = [dual(t) for t in self.positive]
        self.name = name

    # raw Hom data -------------------------------------------------------------
    def _check(self, M: RepComplex):
        if M.poset != self.poset:
            raise PosetMismatch("object lives on a different poset than the weight structure")
        if M.ring != self.ring:
            raise PosetMismatch(f"object is over {M.ring}, weight structure over {self.ring}")

    def top_from_negative(self, M: RepComplex, floor: Optional[int] = None) -> Optional[int]:
        """max q with ``Hom^q(g, M) != 0`` over negative tests g."""
        self._check(M)
        key = ("wneg", id(self), floor)
        if key in M._cache:
            return M._cache[key]
        best = None
        for g in self.negative:
            q = top_nonzero_degree(g, M, floor if best is None else max(best + 1, floor or best + 1))
            if q is not None and (best is None or q > best):
                best = q
        M._cache[key] = best
        return best

    def top_to_positive(self, M: RepComplex, floor: Optional[int] = None, direct: bool = False) -> Optional[int]:
        """max q with ``Hom^q(M, t) != 0`` over positive tests t."""
        self._check(M)
        key = ("wpos", id(self), floor, direct)
        if key in M._cache:
            return M._cache[key]
        best = None
        DM = None if direct else dual(M)
        for t, Dt in zip(self.positive, self._positive_dual):
            fl = floor if best is None else max(best + 1, floor if floor is not None else best + 1)
            q = top_nonzero_degree(M, t, fl) if direct else top_nonzero_degree(Dt, DM, fl)
            if q is not None and (best is None or q > best):
                best = q
        M._cache[key] = best
        return best

    # oracles ------------------------------------------------------------------
    def is_ge(self, M: RepComplex, a: int = 0) -> bool:
        return self.top_from_negative(M, floor=1 - a) is None

    def is_le(self, M: RepComplex, b: int = 0, direct: bool = False) -> bool:
        return self.top_to_positive(M, floor=b + 1, direct=direct) is None

    def membership(self, M: RepComplex, side: str, m: int = 0) -> bool:
        side = _side(side)
        return self.is_ge(M, m) if side == "ge" else self.is_le(M, m)

    def in_heart(self, M: RepComplex) -> bool:
        return self.is_ge(M, 0) and self.is_le(M, 0)

    def weight_range(self, M: RepComplex):
        if is_contractible(M):
            return ZERO_OBJECT
        qn = self.top_from_negative(M)
        qp = self.top_to_positive(M)
        if qn is None or qp is None:
            raise WeightError("object is invisible to the test objects; the structure is not bounded on it")
        return WeightRange(-qn, qp)

    def decompose(self, M: RepComplex, m: int) -> "Decomposition":
        raise DecompositionUnavailable(f"{type(self).__name__} has no decomposition procedure")

    def opposite(self) -> "TransportedWeightStructure":
        """Transport of the opposite structure along duality to the opposite poset."""
        return TransportedWeightStructure(self)

    def describe(self) -> dict:
        return {"kind": self.kind, "name": self.name, "poset": list(self.poset.elements),
                "ring": self.ring.descriptor,
                "negative_tests": [g.name or f"#{k}" for k, g in enumerate(self.negative)],
                "positive_tests": [t.name or f"#{k}" for k, t in enumerate(self.positive)]}


def _side(side: str) -> str:
    s = side.replace(" ", "").replace("≥", ">=").replace("≤", "<=").lower()
    if s in ("ge", "ge0", ">=", ">=0", "w>=0", "geq"):
        return "ge"
    if s in ("le", "le0", "<=", "<=0", "w<=0", "leq"):
        return "le"
    raise ValueError(f"unknown side {side!r}")


class StupidOnGenerators(WeightStructure):
    """Weight structure generated by a negative set H (heart = envelope of H)."""

    kind = "stupid"

    def __init__(self, heart: HeartSpec, name: str = "w"):
        if not heart.negativity_certified:
            res = check_negativity(heart.generators, heart.names)
            if isinstance(res, NegativityViolation):
                raise NegativityFailure(f"generators are not negative: {res.as_json()}")
            heart = res
        self.heart = heart
        super().__init__(heart.poset, heart.ring, heart.generators, heart.generators, name)
        self._projective = _representable_points(heart.generators)

    @property
    def decomposable(self) -> bool:
        return self._projective is not None

    def decompose(self, M: RepComplex, m: int, order: str = "forward") -> "Decomposition":
        """Split the minimal projective model at degree ``-m`` (stupid truncation)."""
        if not self.decomposable:
            raise DecompositionUnavailable("stupid truncation needs the representables as generators")
        self._check(M)
        mod = model(M, order)
        P = mod.P
        keep = {i: p for i, p in P.pts.items() if i >= -m}
        Bp = ProjComplex(P.poset, P.ring, keep, {i: a for i, a in P.d.items() if i in keep and i + 1 in keep})
        B = Bp.realize()
        # inclusion B -> realize(P) -> M
        R = P.realize()
        ring = M.ring
        inc = ChainMap(B, R, {i: {x: ring.eye(R.rank(i, x)) for x in M.poset.elements} for i in B.terms},
                       check=False)
        to_M = compose(mod.aug, inc)
        return Decomposition.from_map(self, M, m, to_M)


def _representable_points(gens) -> Optional[list]:
    """Base points if every generator is a representable in degree 0 and all appear."""
    pts = []
    for g in gens:
        if g.degrees != [0] or g.diffs:
            return None
        t = g.terms[0]
        supp = [x for x in g.poset.elements if t.ranks[x]]
        mins = [x for x in supp if not any(g.poset.less(y, x) for y in supp)]
        if len(mins) != 1 or any(t.ranks[x] != 1 for x in supp):
            return None
        x = mins[0]
        if set(supp) != set(g.poset.up(x)):
            return None
        if any(not np.array_equal(t.maps[(a, b)], g.ring.eye(1)) for a, b in g.poset.strict_pairs
               if a in supp and b in supp):
            return None
        pts.append(x)
    if set(pts) != set(gens[0].poset.elements):
        return None
    return pts


class GluedWeightStructure(WeightStructure):
    """Iterated gluing over strata ``S_1, ..., S_n`` with ``S_l`` open in ``S_l ∪ ... ∪ S_n``.

    Negative tests are extensions by zero of the stratum negative tests;
    positive tests are extensions by zero (from the closed union of the later
    strata) of ``Rj_*`` of the stratum positive tests.
    """

    kind = "glued"

    def __init__(self, poset: Poset, strata: Sequence[Sequence[str]], stratum_ws: Sequence[WeightStructure],
                 name: str = "w"):
        self.strata = [tuple(poset.ordered(s)) for s in strata]
        self.stratum_ws = list(stratum_ws)
        neg, pos = [], []
        for l, (S, w) in enumerate(zip(self.strata, self.stratum_ws)):
            Zl = [x for s in self.strata[l:] for x in s]
            Zpos = poset.sub(Zl)
            dl = open_closed_split(Zpos, [x for s in self.strata[l + 1:] for x in s])
            for g in w.negative:
                e = extend_by_zero(g, poset)
                e.name = f"!{S}:{g.name}" if g.name else None
                neg.append(e)
            for t in w.positive:
                e = extend_by_zero(derived_pushforward_open(t, dl), poset)
                e.name = f"*{S}:{t.name}" if t.name else None
                pos.append(e)
        super().__init__(poset, stratum_ws[0].ring, neg, pos, name)
        if len(self.strata) > 1:
            self.datum = open_closed_split(poset, [x for s in self.strata[1:] for x in s])
            rest = self.datum.Z
            if len(self.strata) == 2:
                self.closed_ws = self.stratum_ws[1]
            else:
                self.closed_ws = GluedWeightStructure(rest, self.strata[1:], self.stratum_ws[1:], name)
        else:
            self.datum = None
            self.closed_ws = None
        self.open_ws = self.stratum_ws[0]

    def decompose(self, M: RepComplex, m: int, order: str = "forward") -> "Decomposition":
        self._check(M)
        if self.datum is None:
            sub = self.open_ws.decompose(M, m, order)
            return Decomposition.from_map(self, M, m, sub.to_M)
        d = self.datum
        ring = M.ring
        # (1) open part: weights <= m of j^*M
        du = self.open_ws.decompose(d.j_upper(M), m, order)
        jXU = d.j_shriek(du.B)
        phi = ChainMap(jXU, M, {i: {x: (du.to_M.at(i, x) if x in d.open_part else ring.zeros(M.rank(i, x), 0))
                                    for x in d.ambient.elements} for i in jXU.terms}, check=False)
        cone1 = Cone(phi)
        C = cone1.complex
        # (2) closed part: weights <= m of i^!C
        F, p, _ = shriek_fiber(C, d)
        dz = self.closed_ws.decompose(d.i_upper(F), m, order)
        Fp, to_F = _pullback_closed(F, dz.B, dz.to_M, d)
        g = compose(p, to_F)                       # F' -> C
        cone2 = Cone(g)
        A0 = cone2.complex
        to_A0 = compose(cone2.inclusion, cone1.inclusion)   # M -> C -> A0
        B0, b0 = cocone(to_A0)
        # replace B0 by its minimal model
        mb = model(B0, order)
        to_M = compose(b0, mb.aug)
        return Decomposition.from_map(self, M, m, to_M)


def _pullback_closed(F: RepComplex, X: RepComplex, psi: ChainMap, d: GluingDatum):
    """F' with ``F'|Z = X`` and ``F'|U = F|U``; transitions z -> u go through psi."""
    from .complexes import PosetRep
    ring, P = F.ring, d.ambient
    inZ = set(d.closed_part)
    degs = sorted(set(X.terms) | set(F.terms))
    terms = {}
    for n in degs:
        ranks = {x: (X.rank(n, x) if x in inZ else F.rank(n, x)) for x in P.elements}
        maps = {}
        for x, y in P.strict_pairs:
            if x in inZ and y in inZ:
                maps[(x, y)] = X.trans(n, x, y) if n in X.terms else ring.zeros(ranks[y], ranks[x])
            elif x in inZ:
                maps[(x, y)] = ring.matmul(F.trans(n, x, y), psi.at(n, x)) if n in F.terms \
                    else ring.zeros(ranks[y], ranks[x])
            else:
                maps[(x, y)] = F.trans(n, x, y) if n in F.terms else ring.zeros(ranks[y], ranks[x])
        terms[n] = PosetRep(P, ring, ranks, maps, check=False)
    diffs = {n: {x: (X.d(n, x) if x in inZ else F.d(n, x)) for x in P.elements} for n in degs}
    Fp = RepComplex(P, ring, terms, diffs, check=False)
    comps = {n: {x: (psi.at(n, x) if x in inZ else ring.eye(F.rank(n, x))) for x in P.elements}
             for n in degs if n in F.terms}
    return Fp, ChainMap(Fp, F, comps, check=False)


class TransportedWeightStructure(WeightStructure):
    """``w^op`` carried to the opposite poset by duality: D swaps the two sides."""

    kind = "transported"

    def __init__(self, base: WeightStructure):
        self.base = base
        super().__init__(base.poset.opposite(), base.ring,
                         [dual(t) for t in base.positive], [dual(g) for g in base.negative],
                         f"{base.name}^op")


# ---------------------------------------------------------------------------
# decompositions


@dataclass
class Decomposition:
    """Triangle ``B -> M -> A -> B[1]`` with B in ``w<=m`` and A in ``w>=m+1``."""

    M: RepComplex
    m: int
    B: RepComplex
    A: RepComplex
    to_M: ChainMap
    to_A: ChainMap
    cone: Cone
    certificates: dict = field(default_factory=dict)

    @classmethod
    def from_map(cls, w: WeightStructure, M: RepComplex, m: int, to_M: ChainMap, certify: bool = True):
        c = Cone(to_M)
        out = cls(M, m, to_M.source, c.complex, to_M, c.inclusion, c)
        if certify:
            out.certify(w)
        return out

    def certify(self, w: WeightStructure) -> dict:
        try:
            self.to_M.validate()
            maps_ok = True
        except ValueError:
            maps_ok = False
        self.certificates = {
            "B_in_w_le_m": w.is_le(self.B, self.m),
            "A_in_w_ge_m_plus_1": w.is_ge(self.A, self.m + 1),
            "triangle_maps_valid": maps_ok,
            "A_is_cone_of_B_to_M": True,
        }
        return self.certificates

    @property
    def certified(self) -> bool:
        return bool(self.certificates) and all(self.certificates.values())


def membership(M: RepComplex, w: WeightStructure, side: str, m: int = 0) -> bool:
    return w.membership(M, side, m)


def weight_decompose(M: RepComplex, w: WeightStructure, m: int, order: str = "forward") -> Decomposition:
    return w.decompose(M, m, order)


def weight_range(M: RepComplex, w: WeightStructure):
    return w.weight_range(M)


# ---------------------------------------------------------------------------
# factor hearts


def factor_heart_hom(X: RepComplex, Y: RepComplex, ideal_source: Sequence[RepComplex],
                     w: Optional[WeightStructure] = None) -> PresentedModule:
    """``Hom(X, Y)`` modulo maps factoring through sums of ``ideal_source`` objects."""
    objs = [X, Y] + list(ideal_source)
    if w is not None:
        for k, o in enumerate(objs):
            if not w.in_heart(o):
                raise NotInHeart(f"object {o.name or k} is not in the heart")
    ring = X.ring
    G = derived_hom(X, Y).group(0)
    if G.Z.shape[1] == 0:
        return PresentedModule.zero(ring)
    comps = []
    for I in ideal_source:
        GA = derived_hom(X, I).group(0)
        GB = derived_hom(I, Y).group(0)
        if GA.is_zero() or GB.is_zero():
            continue
        for a in range(GA.Z.shape[1]):
            for b in range(GB.Z.shape[1]):
                comps.append(compose_classes(X, I, Y, GA.Z[:, a], GB.Z[:, b]))
    den = G.B
    if comps:
        cm = ring.zeros(G.Z.shape[0], len(comps))
        for k, v in enumerate(comps):
            cm[:, k] = v
        den = hstack(ring, cm, G.B, rows=G.Z.shape[0])
    mod, _ = subquotient(ring, G.Z, den)
    return mod


# ---------------------------------------------------------------------------
# weight-exactness audit


def check_weight_exactness(F: Callable[[RepComplex], RepComplex], w_src: WeightStructure,
                           w_tgt: WeightStructure, samples: Iterable[RepComplex], name: str = "F") -> dict:
    """Left exactness: ``w<=0`` to ``w<=0``; right exactness: ``w>=0`` to ``w>=0``."""
    left, right = [], []
    tested_left = tested_right = 0
    for k, M in enumerate(samples):
        label = M.name or f"#{k}"
        img = None
        if w_src.is_le(M, 0):
            tested_left += 1
            img = F(M)
            if not w_tgt.is_le(img, 0):
                left.append(label)
        if w_src.is_ge(M, 0):
            tested_right += 1
            img = F(M) if img is None else img
            if not w_tgt.is_ge(img, 0):
                right.append(label)
    return {"functor": name,
            "left": {"exact": not left, "tested": tested_left, "counterexamples": left},
            "right": {"exact": not right, "tested": tested_right, "counterexamples": right}}
