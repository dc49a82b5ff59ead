"""Sheaves on finite posets (covariant functors with free values) and bounded
cochain complexes of them.

Cochain convention: differentials raise degree and ``(M[n])^i = M^{i+n}``
with differential multiplied by ``(-1)^n``.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Optional

import numpy as np

from .poset import Poset, PosetError
from .rings import CoefficientRing, RingError

__all__ = [
    "ComplexError",
    "NotChainMap",
    "PartMismatch",
    "PosetMismatch",
    "PosetRep",
    "RepComplex",
    "ChainMap",
    "shift",
    "mapping_cone",
    "cocone",
    "direct_sum",
    "restrict",
    "extend_by_zero",
    "dual",
    "representable",
    "point_sheaf",
    "constant_sheaf",
    "compose",
]


class ComplexError(ValueError):
    pass


class NotChainMap(ComplexError):
    pass


class PartMismatch(ComplexError):
    pass


class PosetMismatch(ComplexError):
    pass


def _same_shape(a: np.ndarray, r: int, c: int, what: str):
    if a.shape != (r, c):
        raise ComplexError(f"{what}: expected shape {(r, c)}, got {a.shape}")


class PosetRep:
    """A functor from a finite poset to finitely generated free modules.

    ``maps[(x, y)]`` is the transition ``value(x) -> value(y)`` for every
    strict pair ``x < y``; identities are implicit.
    """

    __slots__ = ("poset", "ring", "ranks", "maps")

    def __init__(self, poset: Poset, ring: CoefficientRing, ranks: Mapping[str, int],
                 maps: Optional[Mapping[tuple[str, str], np.ndarray]] = None, check: bool = True):
        self.poset = poset
        self.ring = ring
        self.ranks = {x: int(ranks.get(x, 0)) for x in poset.elements}
        maps = dict(maps or {})
        full = {}
        for x, y in poset.strict_pairs:
            a = maps.get((x, y))
            if a is None:
                if self.ranks[x] and self.ranks[y]:
                    raise ComplexError(f"missing transition {x} -> {y}")
                a = ring.zeros(self.ranks[y], self.ranks[x])
            full[(x, y)] = a
        self.maps = full
        if check:
            self.validate()

    @classmethod
    def from_covers(cls, poset: Poset, ring: CoefficientRing, ranks: Mapping[str, int],
                    cover_maps: Mapping[tuple[str, str], np.ndarray]) -> "PosetRep":
        """Build all transitions by composing along covering relations."""
        ranks = {x: int(ranks.get(x, 0)) for x in poset.elements}
        maps: dict[tuple[str, str], np.ndarray] = {}
        covers = poset.covers
        for c in cover_maps:
            if c not in covers:
                raise ComplexError(f"{c} is not a covering relation")
        for x, y in covers:
            a = cover_maps.get((x, y))
            if a is None:
                a = ring.zeros(ranks[y], ranks[x])
            a = ring.reduce(np.asarray(a, dtype=object))
            _same_shape(a, ranks[y], ranks[x], f"transition {x}->{y}")
            maps[(x, y)] = a
        # compose along one path; validate() then checks every other path
        pending = [p for p in poset.strict_pairs if p not in maps]
        while pending:
            rest = []
            for x, y in pending:
                for z in poset.elements:
                    if (x, z) in maps and (z, y) in covers:
                        maps[(x, y)] = ring.matmul(maps[(z, y)], maps[(x, z)])
                        break
                else:
                    rest.append((x, y))
            if len(rest) == len(pending):
                raise PosetError("could not compose transitions")
            pending = rest
        return cls(poset, ring, ranks, maps)

    def transition(self, x: str, y: str) -> np.ndarray:
        if x == y:
            return self.ring.eye(self.ranks[x])
        return self.maps[(x, y)]

    def validate(self):
        ring = self.ring
        for (x, y), a in self.maps.items():
            _same_shape(a, self.ranks[y], self.ranks[x], f"transition {x}->{y}")
        els = self.poset.elements
        for x, y in self.poset.strict_pairs:
            for z in els:
                if self.poset.less(y, z):
                    lhs = ring.matmul(self.maps[(y, z)], self.maps[(x, y)])
                    if not np.array_equal(lhs, self.maps[(x, z)]):
                        raise ComplexError(f"functoriality fails on {x} < {y} < {z}")

    @property
    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def is_zero(self) -> bool:
        return self.total_rank == 0


class RepComplex:
    """Bounded cochain complex of poset representations.

    ``terms[i]`` is a :class:`PosetRep`; ``diffs[i][x]`` is the matrix of
    ``d^i`` at the point x.  Zero terms are dropped.
    """

    def __init__(self, poset: Poset, ring: CoefficientRing, terms: Mapping[int, PosetRep],
                 diffs: Optional[Mapping[int, Mapping[str, np.ndarray]]] = None,
                 check: bool = True, name: Optional[str] = None):
        self.poset = poset
        self.ring = ring
        self.terms = {int(i): t for i, t in sorted(terms.items()) if not t.is_zero()}
        diffs = diffs or {}
        self.diffs: dict[int, dict[str, np.ndarray]] = {}
        for i in self.terms:
            if i + 1 not in self.terms:
                continue
            src, tgt = self.terms[i], self.terms[i + 1]
            given = diffs.get(i, {})
            dd = {}
            for x in poset.elements:
                a = given.get(x)
                if a is None:
                    a = ring.zeros(tgt.ranks[x], src.ranks[x])
                dd[x] = a
            self.diffs[i] = dd
        self.name = name
        self._cache: dict = {}
        if check:
            self.validate()

    # accessors --------------------------------------------------------------
    @property
    def degrees(self) -> list[int]:
        return list(self.terms)

    @property
    def amplitude(self) -> Optional[tuple[int, int]]:
        if not self.terms:
            return None
        return min(self.terms), max(self.terms)

    def rank(self, i: int, x: str) -> int:
        t = self.terms.get(i)
        return t.ranks[x] if t is not None else 0

    def ranks(self, i: int) -> dict[str, int]:
        return {x: self.rank(i, x) for x in self.poset.elements}

    def trans(self, i: int, x: str, y: str) -> np.ndarray:
        t = self.terms.get(i)
        if t is None:
            return self.ring.zeros(0, 0)
        return t.transition(x, y)

    def d(self, i: int, x: str) -> np.ndarray:
        dd = self.diffs.get(i)
        if dd is None:
            return self.ring.zeros(self.rank(i + 1, x), self.rank(i, x))
        return dd[x]

    def is_zero_complex(self) -> bool:
        return not self.terms

    @property
    def total_rank(self) -> int:
        return sum(t.total_rank for t in self.terms.values())

    def pointwise(self, x: str) -> dict[int, np.ndarray]:
        """The complex of free modules at x as ``{i: d^i(x)}`` over its degrees."""
        return {i: self.d(i, x) for i in self.terms}

    def validate(self):
        ring = self.ring
        for i, dd in self.diffs.items():
            src, tgt = self.terms[i], self.terms[i + 1]
            for x in self.poset.elements:
                _same_shape(dd[x], tgt.ranks[x], src.ranks[x], f"d^{i} at {x}")
            for x, y in self.poset.strict_pairs:
                lhs = ring.matmul(dd[y], src.maps[(x, y)])
                rhs = ring.matmul(tgt.maps[(x, y)], dd[x])
                if not np.array_equal(lhs, rhs):
                    raise ComplexError(f"d^{i} does not commute with transition {x}->{y}")
            if i + 1 in self.diffs:
                for x in self.poset.elements:
                    if np.any(ring.matmul(self.diffs[i + 1][x], dd[x]) != 0):
                        raise ComplexError(f"d^{i + 1} d^{i} != 0 at {x}")

    def same_category(self, other: "RepComplex"):
        if self.poset != other.poset:
            raise PosetMismatch("complexes live on different posets")
        if self.ring != other.ring:
            raise RingError(f"ring mismatch {self.ring} vs {other.ring}")

    def equals(self, other: "RepComplex") -> bool:
        """Strict (entrywise) equality."""
        if self.poset != other.poset or self.ring != other.ring:
            return False
        if self.degrees != other.degrees:
            return False
        for i in self.terms:
            a, b = self.terms[i], other.terms[i]
            if a.ranks != b.ranks:
                return False
            for k in a.maps:
                if not np.array_equal(a.maps[k], b.maps[k]):
                    return False
        for i in self.diffs:
            for x in self.poset.elements:
                if not np.array_equal(self.diffs[i][x], other.diffs[i][x]):
                    return False
        return True

    def rank_table(self) -> dict[int, dict[str, int]]:
        return {i: dict(t.ranks) for i, t in self.terms.items()}

    def euler_ranks(self) -> dict[str, int]:
        """Alternating sum of stalk ranks at each point."""
        return {x: sum((-1) ** (i % 2) * self.rank(i, x) for i in self.terms)
                for x in self.poset.elements}

    def __repr__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"<RepComplex {label}on {list(self.poset.elements)} over {self.ring}: {self.rank_table()}>"

    @classmethod
    def zero(cls, poset: Poset, ring: CoefficientRing) -> "RepComplex":
        return cls(poset, ring, {}, check=False)

    @classmethod
    def concentrated(cls, rep: PosetRep, degree: int = 0, name: Optional[str] = None) -> "RepComplex":
        return cls(rep.poset, rep.ring, {degree: rep}, check=False, name=name)


class ChainMap:
    """Morphism of complexes: ``comps[i][x]`` maps source^i(x) -> target^i(x)."""

    def __init__(self, source: RepComplex, target: RepComplex,
                 comps: Optional[Mapping[int, Mapping[str, np.ndarray]]] = None, check: bool = True):
        source.same_category(target)
        self.source = source
        self.target = target
        ring = source.ring
        comps = comps or {}
        self.comps: dict[int, dict[str, np.ndarray]] = {}
        for i in source.terms:
            if i not in target.terms:
                continue
            given = comps.get(i, {})
            self.comps[i] = {x: given[x] if x in given else ring.zeros(target.rank(i, x), source.rank(i, x))
                             for x in source.poset.elements}
        if check:
            self.validate()

    @property
    def ring(self) -> CoefficientRing:
        return self.source.ring

    @property
    def poset(self) -> Poset:
        return self.source.poset

    def at(self, i: int, x: str) -> np.ndarray:
        c = self.comps.get(i)
        if c is None:
            return self.ring.zeros(self.target.rank(i, x), self.source.rank(i, x))
        return c[x]

    def validate(self):
        ring = self.ring
        S, T = self.source, self.target
        for i, cc in self.comps.items():
            for x in self.poset.elements:
                _same_shape(cc[x], T.rank(i, x), S.rank(i, x), f"component {i} at {x}")
            for x, y in self.poset.strict_pairs:
                if not np.array_equal(ring.matmul(cc[y], S.trans(i, x, y)),
                                      ring.matmul(T.trans(i, x, y), cc[x])):
                    raise NotChainMap(f"component {i} is not natural on {x}->{y}")
        degs = set(S.terms) | set(T.terms)
        for i in degs:
            for x in self.poset.elements:
                lhs = ring.matmul(T.d(i, x), self.at(i, x))
                rhs = ring.matmul(self.at(i + 1, x), S.d(i, x))
                if lhs.shape != rhs.shape or not np.array_equal(lhs, rhs):
                    raise NotChainMap(f"map does not commute with d^{i} at {x}")

    def is_zero(self) -> bool:
        return all(not np.any(a != 0) for cc in self.comps.values() for a in cc.values())

    @classmethod
    def identity(cls, M: RepComplex) -> "ChainMap":
        ring = M.ring
        return cls(M, M, {i: {x: ring.eye(M.rank(i, x)) for x in M.poset.elements} for i in M.terms},
                   check=False)

    @classmethod
    def zero(cls, source: RepComplex, target: RepComplex) -> "ChainMap":
        return cls(source, target, {}, check=False)


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """g ∘ f."""
    ring = f.ring
    comps = {}
    for i in f.comps:
        if i in g.comps:
            comps[i] = {x: ring.matmul(g.comps[i][x], f.comps[i][x]) for x in f.poset.elements}
    return ChainMap(f.source, g.target, comps, check=False)


# ---------------------------------------------------------------------------
# constructions


def shift(M: RepComplex, n: int) -> RepComplex:
    """``M[n]``: degree i holds ``M^{i+n}``; differentials pick up ``(-1)^n``."""
    if n == 0:
        return M
    ring = M.ring
    sign = -1 if n % 2 else 1
    terms = {i - n: t for i, t in M.terms.items()}
    diffs = {i - n: {x: ring.scale(sign, a) for x, a in dd.items()} for i, dd in M.diffs.items()}
    name = f"{M.name}[{n}]" if M.name else None
    return RepComplex(M.poset, M.ring, terms, diffs, check=False, name=name)


def shift_map(f: ChainMap, n: int) -> ChainMap:
    if n == 0:
        return f
    comps = {i - n: dict(cc) for i, cc in f.comps.items()}
    return ChainMap(shift(f.source, n), shift(f.target, n), comps, check=False)


def _block_rep(poset: Poset, ring: CoefficientRing, parts: list[Optional[PosetRep]]) -> PosetRep:
    ranks = {x: sum(p.ranks[x] for p in parts if p is not None) for x in poset.elements}
    maps = {}
    for x, y in poset.strict_pairs:
        a = ring.zeros(ranks[y], ranks[x])
        r = c = 0
        for p in parts:
            if p is None:
                continue
            a[r:r + p.ranks[y], c:c + p.ranks[x]] = p.maps[(x, y)]
            r += p.ranks[y]
            c += p.ranks[x]
        maps[(x, y)] = a
    return PosetRep(poset, ring, ranks, maps, check=False)


def direct_sum(*Ms: RepComplex) -> RepComplex:
    M0 = Ms[0]
    for M in Ms[1:]:
        M0.same_category(M)
    ring, poset = M0.ring, M0.poset
    degs = sorted(set().union(*[M.terms for M in Ms]))
    terms = {i: _block_rep(poset, ring, [M.terms.get(i) for M in Ms]) for i in degs}
    diffs = {}
    for i in degs:
        if i + 1 not in terms:
            continue
        dd = {}
        for x in poset.elements:
            a = ring.zeros(terms[i + 1].ranks[x], terms[i].ranks[x])
            r = c = 0
            for M in Ms:
                a[r:r + M.rank(i + 1, x), c:c + M.rank(i, x)] = M.d(i, x)
                r += M.rank(i + 1, x)
                c += M.rank(i, x)
            dd[x] = a
        diffs[i] = dd
    return RepComplex(poset, ring, terms, diffs, check=False)


def sum_inclusion(Ms: list[RepComplex], k: int, total: RepComplex) -> ChainMap:
    """Canonical inclusion of the k-th summand into ``direct_sum(*Ms)``."""
    ring = total.ring
    comps = {}
    for i in Ms[k].terms:
        cc = {}
        for x in total.poset.elements:
            off = sum(M.rank(i, x) for M in Ms[:k])
            a = ring.zeros(total.rank(i, x), Ms[k].rank(i, x))
            for j in range(Ms[k].rank(i, x)):
                a[off + j, j] = 1
            cc[x] = a
        comps[i] = cc
    return ChainMap(Ms[k], total, comps, check=False)


def sum_projection(Ms: list[RepComplex], k: int, total: RepComplex) -> ChainMap:
    ring = total.ring
    comps = {}
    for i in Ms[k].terms:
        cc = {}
        for x in total.poset.elements:
            off = sum(M.rank(i, x) for M in Ms[:k])
            a = ring.zeros(Ms[k].rank(i, x), total.rank(i, x))
            for j in range(Ms[k].rank(i, x)):
                a[j, off + j] = 1
            cc[x] = a
        comps[i] = cc
    return ChainMap(total, Ms[k], comps, check=False)


class Cone:
    """Mapping cone of ``f: S -> T`` with its triangle maps.

    ``cone^n = S^{n+1} ⊕ T^n`` and ``d = [[-d_S, 0], [f, d_T]]``.
    """

    def __init__(self, f: ChainMap):
        S, T = f.source, f.target
        ring, poset = f.ring, f.poset
        degs = sorted(set(i - 1 for i in S.terms) | set(T.terms))
        terms = {}
        for n in degs:
            terms[n] = _block_rep(poset, ring, [S.terms.get(n + 1), T.terms.get(n)])
        diffs = {}
        for n in degs:
            if n + 1 not in terms:
                continue
            dd = {}
            for x in poset.elements:
                s0, t0 = S.rank(n + 1, x), T.rank(n, x)
                s1, t1 = S.rank(n + 2, x), T.rank(n + 1, x)
                a = ring.zeros(s1 + t1, s0 + t0)
                a[:s1, :s0] = ring.scale(-1, S.d(n + 1, x))
                a[s1:, :s0] = f.at(n + 1, x)
                a[s1:, s0:] = T.d(n, x)
                dd[x] = a
            diffs[n] = dd
        self.f = f
        self.complex = RepComplex(poset, ring, terms, diffs, check=False)
        C = self.complex
        inc = {}
        for n in T.terms:
            if n not in C.terms:
                continue
            cc = {}
            for x in poset.elements:
                s0 = S.rank(n + 1, x)
                a = ring.zeros(C.rank(n, x), T.rank(n, x))
                for j in range(T.rank(n, x)):
                    a[s0 + j, j] = 1
                cc[x] = a
            inc[n] = cc
        self.inclusion = ChainMap(T, C, inc, check=False)
        S1 = shift(S, 1)
        proj = {}
        for n in C.terms:
            if n not in S1.terms:
                continue
            cc = {}
            for x in poset.elements:
                a = ring.zeros(S1.rank(n, x), C.rank(n, x))
                for j in range(S1.rank(n, x)):
                    a[j, j] = 1
                cc[x] = a
            proj[n] = cc
        self.projection = ChainMap(C, S1, proj, check=False)


def mapping_cone(f: ChainMap) -> RepComplex:
    return Cone(f).complex


def cocone(f: ChainMap) -> tuple[RepComplex, ChainMap]:
    """The fiber ``cone(f)[-1]`` and its canonical map to the source."""
    c = Cone(f)
    F = shift(c.complex, -1)
    # cone[-1]^n = S^n ⊕ T^{n-1}; project onto S
    S = f.source
    ring = f.ring
    comps = {}
    for n in S.terms:
        if n not in F.terms:
            continue
        cc = {}
        for x in S.poset.elements:
            a = ring.zeros(S.rank(n, x), F.rank(n, x))
            for j in range(S.rank(n, x)):
                a[j, j] = 1
            cc[x] = a
        comps[n] = cc
    # shift(-1) multiplies d by -1, so the projection picks up a sign to stay a
    # chain map: d_F restricted to S is -(-d_S) = d_S; no sign needed.
    return F, ChainMap(F, S, comps, check=False)


def restrict(M: RepComplex, part: Iterable[str]) -> RepComplex:
    """Forgetful restriction to a subset (with the induced order)."""
    sub = M.poset.sub(part)
    terms = {}
    for i, t in M.terms.items():
        terms[i] = PosetRep(sub, M.ring, {x: t.ranks[x] for x in sub.elements},
                            {(x, y): t.maps[(x, y)] for x, y in sub.strict_pairs}, check=False)
    diffs = {i: {x: dd[x] for x in sub.elements} for i, dd in M.diffs.items()}
    return RepComplex(sub, M.ring, terms, diffs, check=False)


def restrict_map(f: ChainMap, part: Iterable[str]) -> ChainMap:
    S, T = restrict(f.source, part), restrict(f.target, part)
    comps = {i: {x: cc[x] for x in S.poset.elements} for i, cc in f.comps.items()}
    return ChainMap(S, T, comps, check=False)


def extend_by_zero(X: RepComplex, ambient: Poset) -> RepComplex:
    """Extension by zero from a convex subset (i_* for down-sets, j_! for up-sets)."""
    part = X.poset.elements
    if not ambient.is_convex(part):
        raise PartMismatch("extension by zero needs a locally closed (convex) part")
    if X.poset != ambient.sub(part):
        raise PartMismatch("complex does not live on an induced subposet of the ambient poset")
    ring = X.ring
    terms = {}
    for i, t in X.terms.items():
        ranks = {x: (t.ranks[x] if x in X.poset else 0) for x in ambient.elements}
        maps = {}
        for x, y in ambient.strict_pairs:
            if x in X.poset and y in X.poset:
                maps[(x, y)] = t.maps[(x, y)]
            else:
                maps[(x, y)] = ring.zeros(ranks[y], ranks[x])
        terms[i] = PosetRep(ambient, ring, ranks, maps, check=False)
    diffs = {}
    for i, dd in X.diffs.items():
        diffs[i] = {x: (dd[x] if x in X.poset else ring.zeros(0, 0)) for x in ambient.elements}
    return RepComplex(ambient, ring, terms, diffs, check=False, name=X.name)


def extend_map_by_zero(f: ChainMap, ambient: Poset) -> ChainMap:
    S, T = extend_by_zero(f.source, ambient), extend_by_zero(f.target, ambient)
    ring = f.ring
    comps = {}
    for i, cc in f.comps.items():
        comps[i] = {x: (cc[x] if x in f.poset else ring.zeros(0, 0)) for x in ambient.elements}
    return ChainMap(S, T, comps, check=False)


def dual(M: RepComplex) -> RepComplex:
    """Pointwise R-dual on the opposite poset, degrees negated.

    Free values make this an exact anti-equivalence, so
    ``Hom(M, N) ≅ Hom(dual N, dual M)`` degreewise.
    """
    op = M.poset.opposite()
    ring = M.ring
    terms = {}
    for i, t in M.terms.items():
        maps = {(y, x): t.maps[(x, y)].T.copy() for x, y in M.poset.strict_pairs}
        terms[-i] = PosetRep(op, ring, t.ranks, maps, check=False)
    diffs = {}
    for i, dd in M.diffs.items():
        # (d^i)^T : (M^{i+1})^* -> (M^i)^*, i.e. degree -i-1 -> -i
        sign = -1 if (i % 2) else 1
        diffs[-i - 1] = {x: ring.scale(sign, a.T.copy()) for x, a in dd.items()}
    name = f"D({M.name})" if M.name else None
    return RepComplex(op, ring, terms, diffs, check=False, name=name)


# ---------------------------------------------------------------------------
# standard objects


def representable(poset: Poset, ring: CoefficientRing, x: str, degree: int = 0) -> RepComplex:
    """P_x: value R at every y >= x, identity transitions."""
    up = set(poset.up(x))
    return constant_sheaf(poset, ring, up, degree, name=f"P_{x}")


def point_sheaf(poset: Poset, ring: CoefficientRing, x: str, degree: int = 0) -> RepComplex:
    """Rank one at x, zero elsewhere (needs only the singleton to be convex)."""
    return constant_sheaf(poset, ring, {x}, degree, name=f"R_{x}")


def constant_sheaf(poset: Poset, ring: CoefficientRing, support: Optional[Iterable[str]] = None,
                   degree: int = 0, name: Optional[str] = None) -> RepComplex:
    """Rank one on a convex ``support`` with identity transitions inside it."""
    supp = set(poset.elements if support is None else support)
    if not poset.is_convex(supp):
        raise PartMismatch("constant sheaf support must be convex")
    ranks = {x: (1 if x in supp else 0) for x in poset.elements}
    maps = {}
    for x, y in poset.strict_pairs:
        maps[(x, y)] = ring.eye(1) if (x in supp and y in supp) else ring.zeros(ranks[y], ranks[x])
    rep = PosetRep(poset, ring, ranks, maps, check=False)
    return RepComplex(poset, ring, {degree: rep}, check=False, name=name)
