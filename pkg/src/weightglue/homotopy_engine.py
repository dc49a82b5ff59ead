"""Projective models, Hom complexes and homotopy tests.

Projective objects are sums of representables ``P_x``.  A complex of them is
stored as a :class:`ProjComplex`: the base point of every summand plus one
scalar matrix per differential (``Hom(P_x, P_y) = R`` when ``y <= x``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .complexes import ChainMap, Cone, RepComplex, PosetRep, mapping_cone
from .linalg import (PresentedModule, hstack, kernel_basis, module_image, smith_normal_form,
                     solve_linear, subquotient, vstack)
from .poset import Poset
from .rings import CoefficientRing

__all__ = [
    "ProjComplex",
    "ProjMap",
    "Model",
    "bar_resolution",
    "minimize",
    "model",
    "model_map",
    "HomComplex",
    "HomGroup",
    "GradedHom",
    "derived_hom",
    "is_contractible",
    "null_homotopy",
    "is_homotopy_equivalence",
    "is_quasi_isomorphism",
    "hom_class_to_chainmap",
    "compose_classes",
]


class ProjComplex:
    """Bounded complex of sums of representables.

    ``pts[i]`` lists the base point of each summand in degree i and
    ``d[i]`` is a ``len(pts[i+1]) x len(pts[i])`` matrix whose entry (t, s)
    may be nonzero only if ``pt(t) <= pt(s)``.
    """

    def __init__(self, poset: Poset, ring: CoefficientRing, pts: Mapping[int, Sequence[str]],
                 d: Optional[Mapping[int, np.ndarray]] = None, levels: Optional[Mapping[int, Sequence[int]]] = None):
        self.poset = poset
        self.ring = ring
        self.pts = {i: list(p) for i, p in sorted(pts.items()) if len(p)}
        d = d or {}
        self.d = {}
        for i in self.pts:
            if i + 1 in self.pts:
                a = d.get(i)
                if a is None:
                    a = ring.zeros(len(self.pts[i + 1]), len(self.pts[i]))
                self.d[i] = a
        self.levels = None
        if levels is not None:
            self.levels = {i: list(levels[i]) for i in self.pts}
        self._real: Optional[RepComplex] = None

    @property
    def degrees(self) -> list[int]:
        return list(self.pts)

    def size(self, i: int) -> int:
        return len(self.pts.get(i, ()))

    def diff(self, i: int) -> np.ndarray:
        a = self.d.get(i)
        if a is None:
            return self.ring.zeros(self.size(i + 1), self.size(i))
        return a

    @property
    def total_size(self) -> int:
        return sum(len(p) for p in self.pts.values())

    def check(self):
        leq = self.poset.leq
        for i, a in self.d.items():
            for t, s in zip(*np.nonzero(a != 0)):
                if not leq(self.pts[i + 1][t], self.pts[i][s]):
                    raise ValueError(f"entry ({t},{s}) of d^{i} has no underlying map")
            if i + 1 in self.d and np.any(self.ring.matmul(self.d[i + 1], a) != 0):
                raise ValueError(f"d^{i + 1} d^{i} != 0")

    def realize(self) -> RepComplex:
        """The complex of poset representations, value at y = summands below y."""
        if self._real is not None:
            return self._real
        ring, poset = self.ring, self.poset
        idx = {}
        terms = {}
        for i, ps in self.pts.items():
            idx[i] = {y: [k for k, p in enumerate(ps) if poset.leq(p, y)] for y in poset.elements}
            ranks = {y: len(idx[i][y]) for y in poset.elements}
            maps = {}
            for x, y in poset.strict_pairs:
                a = ring.zeros(ranks[y], ranks[x])
                pos = {k: r for r, k in enumerate(idx[i][y])}
                for c, k in enumerate(idx[i][x]):
                    a[pos[k], c] = 1
                maps[(x, y)] = a
            terms[i] = PosetRep(poset, ring, ranks, maps, check=False)
        diffs = {}
        for i, a in self.d.items():
            diffs[i] = {y: a[np.ix_(idx[i + 1][y], idx[i][y])] for y in poset.elements}
        self._idx = idx
        self._real = RepComplex(poset, ring, terms, diffs, check=False)
        self._real._cache["proj"] = self
        return self._real

    def index_at(self, i: int, y: str) -> list[int]:
        self.realize()
        return self._idx.get(i, {}).get(y, [])


@dataclass
class ProjMap:
    """Degree-0 map of projective complexes: ``comps[i]`` is tgt x src scalars."""

    source: ProjComplex
    target: ProjComplex
    comps: dict

    def at(self, i: int) -> np.ndarray:
        a = self.comps.get(i)
        if a is None:
            return self.source.ring.zeros(self.target.size(i), self.source.size(i))
        return a

    def realize(self) -> ChainMap:
        S, T = self.source.realize(), self.target.realize()
        comps = {}
        for i in S.terms:
            if i not in T.terms:
                continue
            a = self.at(i)
            comps[i] = {y: a[np.ix_(self.target.index_at(i, y), self.source.index_at(i, y))]
                        for y in self.source.poset.elements}
        return ChainMap(S, T, comps, check=False)

    def then(self, g: "ProjMap") -> "ProjMap":
        """g ∘ self."""
        ring = self.source.ring
        comps = {i: ring.matmul(g.at(i), self.at(i)) for i in self.source.pts}
        return ProjMap(self.source, g.target, comps)


def projmap_from_chainmap(f: ChainMap, S: ProjComplex, T: ProjComplex) -> ProjMap:
    """Read a chain map between realizations off the summand generators."""
    ring = f.ring
    comps = {}
    for i, ps in S.pts.items():
        a = ring.zeros(T.size(i), len(ps))
        if i in T.pts:
            for s, p in enumerate(ps):
                col = S.index_at(i, p).index(s)
                v = f.at(i, p)[:, col]
                for r, t in enumerate(T.index_at(i, p)):
                    a[t, s] = v[r]
        comps[i] = a
    return ProjMap(S, T, comps)


def identity_projmap(P: ProjComplex) -> ProjMap:
    return ProjMap(P, P, {i: P.ring.eye(P.size(i)) for i in P.pts})


# ---------------------------------------------------------------------------
# bar resolution


def _bar_summands(M: RepComplex):
    poset = M.poset
    chains = poset.chains()
    out = {}
    for i in M.terms:
        for c in chains:
            k = len(c) - 1
            for b in range(M.rank(i, c[0])):
                out.setdefault(i - k, []).append((i, c, b))
    return out


def bar_resolution(M: RepComplex) -> tuple[ProjComplex, ChainMap, dict]:
    """Normalized bar resolution and its augmentation ``realize(P) -> M``.

    Summand ``(i, x0<...<xk, b)`` is ``P_{xk}`` in total degree ``i - k``
    carrying basis vector b of ``M^i(x0)``.
    """
    ring, poset = M.ring, M.poset
    summ = _bar_summands(M)
    index = {deg: {key: n for n, key in enumerate(keys)} for deg, keys in summ.items()}
    pts = {deg: [key[1][-1] for key in keys] for deg, keys in summ.items()}
    d = {}
    for deg, keys in summ.items():
        if deg + 1 not in summ:
            continue
        tgt = index[deg + 1]
        a = ring.zeros(len(summ[deg + 1]), len(keys))
        for col, (i, c, b) in enumerate(keys):
            k = len(c) - 1
            if k >= 1:
                # face 0 moves the vector along x0 -> x1
                tr = M.trans(i, c[0], c[1])
                for b2 in range(tr.shape[0]):
                    if tr[b2, b] != 0:
                        a[tgt[(i, c[1:], b2)], col] += tr[b2, b]
                for j in range(1, k + 1):
                    sign = -1 if j % 2 else 1
                    a[tgt[(i, c[:j] + c[j + 1:], b)], col] += sign
            dm = M.d(i, c[0])
            vsign = -1 if k % 2 else 1
            for b2 in range(dm.shape[0]):
                if dm[b2, b] != 0:
                    a[tgt[(i + 1, c, b2)], col] += vsign * dm[b2, b]
        d[deg] = ring.reduce(a)
    P = ProjComplex(poset, ring, pts, d)
    R = P.realize()
    comps = {}
    for deg in R.terms:
        if deg not in M.terms:
            continue
        cc = {}
        for y in poset.elements:
            a = ring.zeros(M.rank(deg, y), R.rank(deg, y))
            for col, k in enumerate(P.index_at(deg, y)):
                i, c, b = summ[deg][k]
                if len(c) == 1:
                    a[:, col] = M.trans(i, c[0], y)[:, b]
            cc[y] = a
        comps[deg] = cc
    aug = ChainMap(R, M, comps, check=False)
    return P, aug, summ


def bar_map(f: ChainMap, Psrc: ProjComplex, ssrc: dict, Ptgt: ProjComplex, stgt: dict) -> ProjMap:
    """Functorial image of ``f`` on bar resolutions."""
    ring = f.ring
    tindex = {deg: {key: n for n, key in enumerate(keys)} for deg, keys in stgt.items()}
    comps = {}
    for deg, keys in ssrc.items():
        if deg not in stgt:
            continue
        a = ring.zeros(len(stgt[deg]), len(keys))
        for col, (i, c, b) in enumerate(keys):
            fi = f.at(i, c[0])
            for b2 in range(fi.shape[0]):
                if fi[b2, b] != 0:
                    a[tindex[deg][(i, c, b2)], col] = fi[b2, b]
        comps[deg] = a
    return ProjMap(Psrc, Ptgt, comps)


# ---------------------------------------------------------------------------
# minimization by unit pivots


def minimize(P: ProjComplex, order: str = "forward", respect_levels: bool = False):
    """Cancel invertible pieces between summands on the same base point.

    Returns ``(Q, iota, pi)`` with ``iota: Q -> P`` and ``pi: P -> Q`` chain
    maps, ``pi iota = id`` and ``iota pi`` homotopic to the identity.
    Unit entries are cancelled directly; when none is left, a Smith form of
    each same-point block exposes hidden ones (e.g. the column (2, 3) over Z).
    Hence an acyclic input always reduces to the zero complex.
    ``order`` picks the pivot scan direction ("forward" or "reverse").
    With ``respect_levels`` only summands on equal filtration levels interact.
    """
    ring = P.ring
    st = _Elim(P, respect_levels)
    degs = sorted(st.pts)
    if order == "reverse":
        degs = degs[::-1]
    changed = True
    while changed:
        changed = False
        for i in degs:
            while i in st.d and st.d[i].size:
                piv = _find_pivot(ring, st.d[i], st.pts[i + 1], st.pts[i], order,
                                  st.key_list(i + 1), st.key_list(i))
                if piv is None and st.expose_unit(i):
                    piv = _find_pivot(ring, st.d[i], st.pts[i + 1], st.pts[i], order,
                                      st.key_list(i + 1), st.key_list(i))
                if piv is None:
                    break
                st.cancel(i, *piv)
                changed = True
    pts, d, lev = st.pts, st.d, st.lev
    Q = ProjComplex(P.poset, ring, pts, {i: a for i, a in d.items() if i in pts and i + 1 in pts
                                         and len(pts[i]) and len(pts[i + 1])},
                    levels=lev)
    io = ProjMap(Q, P, {i: st.iota[i] for i in Q.pts})
    pr = ProjMap(P, Q, {i: st.pi[i] for i in Q.pts})
    return Q, io, pr


class _Elim:
    """Working state of the elimination (d, iota: P <- Q, pi: Q <- P)."""

    def __init__(self, P: ProjComplex, respect_levels: bool):
        ring = self.ring = P.ring
        self.pts = {i: list(p) for i, p in P.pts.items()}
        self.lev = {i: list(l) for i, l in P.levels.items()} if P.levels is not None else None
        self.use_levels = respect_levels and self.lev is not None
        self.d = {i: a.copy() for i, a in P.d.items()}
        self.iota = {i: ring.eye(len(p)) for i, p in self.pts.items()}
        self.pi = {i: ring.eye(len(p)) for i, p in self.pts.items()}

    def key_list(self, i):
        if self.use_levels:
            return list(zip(self.pts[i], self.lev[i]))
        return self.pts[i]

    def cancel(self, i, t, s):
        ring = self.ring
        a = self.d[i]
        phi_inv = ring.inverse(a[t, s])
        rows = [r for r in range(a.shape[0]) if r != t]
        cols = [c for c in range(a.shape[1]) if c != s]
        delta = a[t, cols]
        gamma = a[rows, s]
        eps = a[np.ix_(rows, cols)]
        self.d[i] = ring.reduce(eps - np.outer(gamma, delta) * phi_inv) if eps.size else eps
        if i - 1 in self.d:
            self.d[i - 1] = self.d[i - 1][cols, :]
        if i + 1 in self.d:
            self.d[i + 1] = self.d[i + 1][:, rows]
        io = self.iota[i]
        self.iota[i] = ring.reduce(io[:, cols] - np.outer(io[:, s], delta) * phi_inv) \
            if io.shape[0] and cols else io[:, cols]
        self.iota[i + 1] = self.iota[i + 1][:, rows]
        self.pi[i] = self.pi[i][cols, :]
        po = self.pi[i + 1]
        self.pi[i + 1] = ring.reduce(po[rows, :] - np.outer(gamma, po[t, :]) * phi_inv) \
            if rows and po.shape[1] else po[rows, :]
        self.pts[i] = [self.pts[i][c] for c in cols]
        self.pts[i + 1] = [self.pts[i + 1][r] for r in rows]
        if self.lev is not None:
            self.lev[i] = [self.lev[i][c] for c in cols]
            self.lev[i + 1] = [self.lev[i + 1][r] for r in rows]

    def expose_unit(self, i) -> bool:
        """Change bases on one same-point block so that a unit entry appears."""
        ring = self.ring
        a = self.d[i]
        tk, sk = self.key_list(i + 1), self.key_list(i)
        for key in dict.fromkeys(sk):
            cols = [c for c, k in enumerate(sk) if k == key]
            rows = [r for r, k in enumerate(tk) if k == key]
            if not rows or not cols:
                continue
            block = a[np.ix_(rows, cols)]
            if not np.any(block != 0):
                continue
            U, D, V = smith_normal_form(ring, block)
            if not ring.is_unit(D[0, 0]) or (len(rows) == 1 and len(cols) == 1):
                continue
            Uinv = solve_linear(ring, U, ring.eye(len(rows)))
            Vinv = solve_linear(ring, V, ring.eye(len(cols)))
            # new column basis for degree i is V, new row basis for degree i+1 is U^-1
            a = a.copy()
            a[rows, :] = ring.matmul(U, a[rows, :])
            a[:, cols] = ring.matmul(a[:, cols], V)
            self.d[i] = a
            if i - 1 in self.d:
                b = self.d[i - 1].copy()
                b[cols, :] = ring.matmul(Vinv, b[cols, :])
                self.d[i - 1] = b
            if i + 1 in self.d:
                b = self.d[i + 1].copy()
                b[:, rows] = ring.matmul(b[:, rows], Uinv)
                self.d[i + 1] = b
            io = self.iota[i].copy()
            io[:, cols] = ring.matmul(io[:, cols], V)
            self.iota[i] = io
            pv = self.pi[i].copy()
            pv[cols, :] = ring.matmul(Vinv, pv[cols, :])
            self.pi[i] = pv
            io = self.iota[i + 1].copy()
            io[:, rows] = ring.matmul(io[:, rows], Uinv)
            self.iota[i + 1] = io
            pv = self.pi[i + 1].copy()
            pv[rows, :] = ring.matmul(U, pv[rows, :])
            self.pi[i + 1] = pv
            return True
        return False


def _find_pivot(ring, a, tpts, spts, order, tkeys, skeys):
    nz = np.nonzero(a != 0)
    pairs = list(zip(nz[0].tolist(), nz[1].tolist()))
    if order == "reverse":
        pairs = pairs[::-1]
    for t, s in pairs:
        if tkeys[t] != skeys[s]:
            continue
        if ring.is_unit(a[t, s]):
            return t, s
    return None


# ---------------------------------------------------------------------------
# models


@dataclass
class Model:
    """Minimal projective model of a complex with its comparison data."""

    P: ProjComplex              # minimized
    aug: ChainMap               # realize(P) -> M, a quasi-isomorphism
    bar: ProjComplex
    summands: dict
    iota: ProjMap               # P -> bar
    pi: ProjMap                 # bar -> P
    bar_aug: ChainMap


def model(M: RepComplex, order: str = "forward") -> Model:
    key = ("model", order)
    cached = M._cache.get(key)
    if cached is not None:
        return cached
    B, baug, summ = bar_resolution(M)
    Q, io, pr = minimize(B, order=order)
    real = io.realize()
    aug = _compose_chain(baug, real)
    out = Model(Q, aug, B, summ, io, pr, baug)
    M._cache[key] = out
    return out


def _compose_chain(g: ChainMap, f: ChainMap) -> ChainMap:
    ring = f.ring
    comps = {}
    for i in f.source.terms:
        if i in g.target.terms:
            comps[i] = {x: ring.matmul(g.at(i, x), f.at(i, x)) for x in f.poset.elements}
    return ChainMap(f.source, g.target, comps, check=False)


def model_map(f: ChainMap, order: str = "forward") -> ProjMap:
    """``pi_T o B(f) o iota_S`` between minimal models."""
    ms, mt = model(f.source, order), model(f.target, order)
    bf = bar_map(f, ms.bar, ms.summands, mt.bar, mt.summands)
    return ms.iota.then(bf).then(mt.pi)


# ---------------------------------------------------------------------------
# Hom complexes


class HomComplex:
    """``Hom^*(P, N)`` for P projective; coordinates are ``f_s in N^{i+q}(pt s)``."""

    def __init__(self, P: ProjComplex, N: RepComplex):
        if P.poset != N.poset:
            from .complexes import PosetMismatch
            raise PosetMismatch("Hom between complexes on different posets")
        self.P, self.N = P, N
        self.ring = N.ring
        if P.pts and N.terms:
            lo = min(N.terms) - max(P.pts)
            hi = max(N.terms) - min(P.pts)
        else:
            lo, hi = 0, -1
        self.qrange = (lo, hi)
        self._offsets: dict[int, tuple[dict, int]] = {}
        self._D: dict[int, np.ndarray] = {}
        self._groups: dict[int, "HomGroup"] = {}

    def offsets(self, q: int):
        if q in self._offsets:
            return self._offsets[q]
        off = {}
        n = 0
        for i, ps in self.P.pts.items():
            for s, p in enumerate(ps):
                r = self.N.rank(i + q, p)
                off[(i, s)] = (n, r)
                n += r
        self._offsets[q] = (off, n)
        return off, n

    def dim(self, q: int) -> int:
        return self.offsets(q)[1]

    def D(self, q: int) -> np.ndarray:
        """Differential ``Hom^q -> Hom^{q+1}``: ``f -> d_N f - (-1)^q f d_P``."""
        if q in self._D:
            return self._D[q]
        ring, P, N = self.ring, self.P, self.N
        src, n0 = self.offsets(q)
        tgt, n1 = self.offsets(q + 1)
        a = ring.zeros(n1, n0)
        sign = 1 if q % 2 else -1   # -(-1)^q
        for (i, s), (o1, r1) in tgt.items():
            if r1 == 0:
                continue
            p = P.pts[i][s]
            o0, r0 = src[(i, s)]
            if r0:
                a[o1:o1 + r1, o0:o0 + r0] = N.d(i + q, p)
            if i + 1 in P.pts:
                col = P.diff(i)[:, s]
                for t in np.nonzero(col != 0)[0]:
                    ot, rt = src[(i + 1, int(t))]
                    if rt == 0:
                        continue
                    tr = N.trans(i + 1 + q, P.pts[i + 1][t], p)
                    a[o1:o1 + r1, ot:ot + rt] += sign * col[t] * tr
        a = ring.reduce(a)
        self._D[q] = a
        return a

    def precompose(self, phi: ProjMap, other: "HomComplex", q: int) -> np.ndarray:
        """Matrix of ``f -> f o phi`` from ``Hom^q(P, N)`` to ``Hom^q(P', N)``.

        ``phi: P' -> P`` and ``other`` is ``Hom(P', N)``.
        """
        ring, N = self.ring, self.N
        src, n0 = self.offsets(q)
        tgt, n1 = other.offsets(q)
        a = ring.zeros(n1, n0)
        for (i, s2), (o1, r1) in tgt.items():
            if r1 == 0 or i not in self.P.pts:
                continue
            p2 = other.P.pts[i][s2]
            col = phi.at(i)[:, s2]
            for s in np.nonzero(col != 0)[0]:
                o0, r0 = src[(i, int(s))]
                if r0 == 0:
                    continue
                tr = N.trans(i + q, self.P.pts[i][s], p2)
                a[o1:o1 + r1, o0:o0 + r0] += col[s] * tr
        return ring.reduce(a)

    def postcompose(self, g: ChainMap, other: "HomComplex", q: int) -> np.ndarray:
        """Matrix of ``f -> g o f`` from ``Hom^q(P, N)`` to ``Hom^q(P, N')``."""
        ring = self.ring
        src, n0 = self.offsets(q)
        tgt, n1 = other.offsets(q)
        a = ring.zeros(n1, n0)
        for (i, s), (o1, r1) in tgt.items():
            o0, r0 = src[(i, s)]
            if r0 and r1:
                a[o1:o1 + r1, o0:o0 + r0] = g.at(i + q, self.P.pts[i][s])
        return a

    def cocycles(self, q: int) -> np.ndarray:
        n = self.dim(q)
        if n == 0:
            return self.ring.zeros(0, 0)
        return kernel_basis(self.ring, self.D(q))

    def coboundaries(self, q: int) -> np.ndarray:
        return self.D(q - 1)

    def group(self, q: int) -> "HomGroup":
        if q in self._groups:
            return self._groups[q]
        Z = self.cocycles(q)
        B = self.coboundaries(q)
        n = self.dim(q)
        if Z.shape[1] == 0:
            mod = PresentedModule.zero(self.ring)
        else:
            mod, _ = subquotient(self.ring, Z, B)
        g = HomGroup(self, q, mod, Z, B)
        self._groups[q] = g
        return g


@dataclass
class HomGroup:
    """``H^q`` of a Hom complex: generators are the columns of ``Z``."""

    complex: HomComplex
    q: int
    module: PresentedModule
    Z: np.ndarray
    B: np.ndarray

    @property
    def ring(self) -> CoefficientRing:
        return self.complex.ring

    def is_zero(self) -> bool:
        return self.module.is_zero

    def coords(self, v: np.ndarray) -> Optional[np.ndarray]:
        """Coordinates of a cocycle in terms of the generators (mod B)."""
        ring = self.ring
        n = self.Z.shape[1]
        if n == 0:
            return ring.zeros(0, v.shape[1] if v.ndim == 2 else 1) if v.ndim == 2 else ring.vector([])
        A = hstack(ring, self.Z, self.B, rows=self.Z.shape[0])
        x = solve_linear(ring, A, v)
        if x is None:
            return None
        return x[:n] if x.ndim == 1 else x[:n, :]

    def induced(self, T: np.ndarray, other: "HomGroup") -> np.ndarray:
        """Matrix (other gens x self gens) of the map induced by the cochain map T."""
        ring = self.ring
        if self.Z.shape[1] == 0 or other.Z.shape[1] == 0:
            return ring.zeros(other.Z.shape[1], self.Z.shape[1])
        img = ring.matmul(T, self.Z)
        x = other.coords(img)
        if x is None:
            raise ValueError("cochain map does not preserve cocycles")
        return x

    def subgroup(self, gens: np.ndarray) -> PresentedModule:
        """The submodule generated by cocycles ``gens`` (taken mod B)."""
        ring = self.ring
        if gens.shape[1] == 0:
            return PresentedModule.zero(ring)
        mod, _ = subquotient(ring, gens, self.B)
        return mod


@dataclass
class GradedHom:
    """Hom^q(M, N) for all q in a finite window (zero outside)."""

    source: RepComplex
    target: RepComplex
    complex: HomComplex
    groups: dict = field(default_factory=dict)

    def __getitem__(self, q: int) -> PresentedModule:
        lo, hi = self.complex.qrange
        if q < lo or q > hi:
            return PresentedModule.zero(self.complex.ring)
        return self.group(q).module

    def group(self, q: int) -> HomGroup:
        if q not in self.groups:
            self.groups[q] = self.complex.group(q)
        return self.groups[q]

    @property
    def qrange(self) -> tuple[int, int]:
        return self.complex.qrange

    def nonzero_degrees(self) -> list[int]:
        lo, hi = self.qrange
        return [q for q in range(lo, hi + 1) if not self[q].is_zero]

    def summary(self) -> dict:
        return {q: self[q].describe() for q in self.nonzero_degrees()}


def hom_complex(M: RepComplex, N: RepComplex, order: str = "forward") -> HomComplex:
    key = ("hom", id(N), order)
    hit = M._cache.get(key)
    if hit is not None and hit.N is N:
        return hit
    H = HomComplex(model(M, order).P, N)
    M._cache[key] = H
    return H


def derived_hom(M: RepComplex, N: RepComplex, order: str = "forward") -> GradedHom:
    """Derived Hom groups computed from the minimal projective model of M."""
    M.same_category(N)
    return GradedHom(M, N, hom_complex(M, N, order))


# ---------------------------------------------------------------------------
# contractibility


def null_homotopy(M: RepComplex) -> Optional[dict]:
    """Pointwise contracting homotopy ``{x: {i: h^i}}`` or None.

    Each stalk is a bounded complex of free modules, so being zero in the
    derived category is the same as every stalk complex being split exact.
    The homotopy is built top-down: ``d^{i-1} h^i = 1 - h^{i+1} d^i``.
    """
    ring = M.ring
    out = {}
    degs = M.degrees
    if not degs:
        return {x: {} for x in M.poset.elements}
    for x in M.poset.elements:
        h = {}
        prev = None  # h^{i+1}
        for i in range(max(degs), min(degs) - 1, -1):
            n = M.rank(i, x)
            rhs = ring.eye(n)
            if prev is not None and n:
                rhs = ring.sub(rhs, ring.matmul(prev, M.d(i, x)))
            A = M.d(i - 1, x)
            sol = solve_linear(ring, A, rhs) if n else ring.zeros(M.rank(i - 1, x), 0)
            if sol is None:
                return None
            h[i] = sol
            prev = sol
        out[x] = h
    return out


def is_contractible(M: RepComplex) -> bool:
    return null_homotopy(M) is not None


def is_homotopy_equivalence(f: ChainMap) -> bool:
    """Cone test; equivalently f is an isomorphism in the derived category."""
    f.validate()
    return is_contractible(mapping_cone(f))


is_quasi_isomorphism = is_homotopy_equivalence


def check_null_homotopy(M: RepComplex, h: dict) -> bool:
    ring = M.ring
    for x, hx in h.items():
        for i in M.degrees:
            n = M.rank(i, x)
            lhs = ring.zeros(n, n)
            if i in hx and M.rank(i - 1, x):
                lhs = ring.add(lhs, ring.matmul(M.d(i - 1, x), hx[i]))
            if i + 1 in hx and M.rank(i + 1, x):
                lhs = ring.add(lhs, ring.matmul(hx[i + 1], M.d(i, x)))
            if not np.array_equal(lhs, ring.eye(n)):
                return False
    return True


# ---------------------------------------------------------------------------
# derived morphisms


def hom_class_to_chainmap(P: ProjComplex, N: RepComplex, v: np.ndarray, H: Optional[HomComplex] = None) -> ChainMap:
    """Realize a degree-0 cocycle of ``Hom(P, N)`` as a chain map ``realize(P) -> N``."""
    H = H or HomComplex(P, N)
    ring = N.ring
    off, _ = H.offsets(0)
    R = P.realize()
    comps = {}
    for i in R.terms:
        if i not in N.terms:
            continue
        cc = {}
        for y in P.poset.elements:
            a = ring.zeros(N.rank(i, y), R.rank(i, y))
            for col, s in enumerate(P.index_at(i, y)):
                o, r = off[(i, s)]
                if r:
                    fs = np.asarray(v[o:o + r], dtype=object).reshape(-1, 1)
                    a[:, col] = ring.matmul(N.trans(i, P.pts[i][s], y), fs)[:, 0]
            cc[y] = a
        comps[i] = cc
    return ChainMap(R, N, comps, check=False)


def lift_to_model(X: RepComplex, I: RepComplex, v: np.ndarray) -> ProjMap:
    """Lift a degree-0 class ``v`` of ``Hom(P_X, I)`` to a map ``P_X -> P_I``.

    Solves ``aug_I o a - v = D h`` with ``a`` a chain map, h in degree -1.
    """
    ring = X.ring
    PX = model(X).P
    mi = model(I)
    HPP = HomComplex(PX, mi.P.realize())
    HPI = hom_complex(X, I)
    post = HPP.postcompose(mi.aug, HPI, 0)
    D0 = HPP.D(0)
    Dm = HPI.D(-1)
    n_a, n_h = HPP.dim(0), HPI.dim(-1)
    top = hstack(ring, D0, ring.zeros(D0.shape[0], n_h), rows=D0.shape[0])
    bot = hstack(ring, post, ring.scale(-1, Dm), rows=post.shape[0])
    A = vstack(ring, top, bot, cols=n_a + n_h)
    rhs = np.concatenate([ring.zeros(D0.shape[0], 1)[:, 0], np.asarray(v, dtype=object).reshape(-1)])
    sol = solve_linear(ring, A, rhs)
    if sol is None:
        raise ValueError("class does not lift through the model augmentation")
    a = sol[:n_a]
    # read off a as scalar matrices P_X -> P_I: f_s in realize(P_I)^i(pt s)
    off, _ = HPP.offsets(0)
    comps = {}
    for i, ps in PX.pts.items():
        m = ring.zeros(mi.P.size(i), len(ps))
        for s, p in enumerate(ps):
            o, r = off[(i, s)]
            for k, t in enumerate(mi.P.index_at(i, p)):
                m[t, s] = a[o + k]
        comps[i] = m
    return ProjMap(PX, mi.P, comps)


def compose_classes(X: RepComplex, I: RepComplex, Y: RepComplex, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Cocycle of ``beta o alpha`` in ``Hom^0(P_X, Y)`` for classes alpha: X->I, beta: I->Y."""
    lift = lift_to_model(X, I, alpha)
    HI = hom_complex(I, Y)
    HX = hom_complex(X, Y)
    T = HI.precompose(lift, HX, 0)
    return X.ring.matmul(T, np.asarray(beta, dtype=object).reshape(-1, 1))[:, 0]
