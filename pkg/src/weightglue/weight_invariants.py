"""Weight complexes, weight spectral sequences, weight filtrations and K_0."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .complexes import ChainMap, Cone, RepComplex, compose, dual, extend_by_zero, shift, shift_map
from .homotopy_engine import (HomComplex, ProjComplex, ProjMap, hom_complex, is_contractible,
                              minimize, model, projmap_from_chainmap)
from .linalg import (PresentedModule, hstack, kernel_basis, modules_isomorphic, preimage,
                     solve_linear, subquotient)
from .rings import CoefficientRing
from .poset_model import derived_pushforward_open, open_closed_split
from .gluing import image_in, induced_precomposition
from .weight_core import (ZERO_OBJECT, GluedWeightStructure, WeightError, WeightRange,
                          WeightStructure)

__all__ = [
    "UnregisteredHeartSummand",
    "WeightComplexResult",
    "weight_complex",
    "weight_range_via_t",
    "SpectralPages",
    "weight_spectral_sequence",
    "weight_filtration",
    "abutment_filtration",
    "HeartRegistry",
    "default_registry",
    "euler_class",
    "k0_audit",
]


class UnregisteredHeartSummand(WeightError):
    pass


# ---------------------------------------------------------------------------
# tower and weight complex


def _proj(T: RepComplex) -> ProjComplex:
    P = T._cache.get("proj")
    if P is None:
        raise WeightError("tower stage is not a realized projective complex")
    return P


def _window(M: RepComplex, w: WeightStructure):
    r = w.weight_range(M)
    if r is ZERO_OBJECT:
        return None
    return r.lo, r.hi


@dataclass
class Tower:
    """``T_lo-1 -> T_lo -> ... -> T_hi`` with ``T_m`` a model of ``w_{<=m} M``."""

    lo: int
    hi: int
    stages: dict            # m -> RepComplex (realized projective)
    maps: dict              # m -> ChainMap T_{m-1} -> T_m
    to_M: ChainMap          # T_hi -> M


def weight_tower(M: RepComplex, w: WeightStructure, window: Optional[tuple] = None,
                 order: str = "forward") -> Optional[Tower]:
    """Postnikov tower built by repeated decomposition, from the top weight down."""
    key = ("tower", id(w), window, order)
    if key in M._cache:
        return M._cache[key]
    win = window if window is not None else _window(M, w)
    if win is None:
        M._cache[key] = None
        return None
    lo, hi = win
    top = w.decompose(M, hi, order)
    stages = {hi: top.B}
    maps = {}
    for m in range(hi - 1, lo - 2, -1):
        d = w.decompose(stages[m + 1], m, order)
        stages[m] = d.B
        maps[m + 1] = d.to_M
    out = Tower(lo, hi, stages, maps, top.to_M)
    M._cache[key] = out
    return out


@dataclass
class WeightComplexResult:
    """Heart terms ``terms[-m] = cone(T_{m-1} -> T_m)[-m]`` and their differentials."""

    terms: dict             # cochain degree -> RepComplex
    differentials: dict     # degree k -> ChainMap terms[k] -> terms[k+1]
    tower: Optional[Tower]
    certificates: dict = field(default_factory=dict)

    def support(self) -> list:
        return [k for k, T in sorted(self.terms.items()) if not is_contractible(T)]

    def as_json(self) -> dict:
        return {"terms": {str(k): T.rank_table() for k, T in sorted(self.terms.items())},
                "support": self.support(), "certificates": self.certificates}


def weight_complex(M: RepComplex, w: WeightStructure, window: Optional[tuple] = None,
                   order: str = "forward", certify: bool = True) -> WeightComplexResult:
    tower = weight_tower(M, w, window, order)
    if tower is None:
        return WeightComplexResult({}, {}, None, {"zero_object": True})
    cones = {m: Cone(tower.maps[m]) for m in range(tower.lo, tower.hi + 1)}
    terms = {-m: shift(cones[m].complex, -m) for m in cones}
    diffs = {}
    for m in range(tower.lo + 1, tower.hi + 1):
        # G_m -> T_{m-1}[1] -> G_{m-1}[1], then shift by -m
        conn = cones[m].projection
        inc = shift_map(cones[m - 1].inclusion, 1)
        inc = ChainMap(conn.target, inc.target, inc.comps, check=False)
        g = compose(inc, conn)
        diffs[-m] = ChainMap(terms[-m], terms[-m + 1], shift_map(g, -m).comps, check=False)
    cert = {}
    if certify:
        cert["terms_in_heart"] = all(w.in_heart(T) for T in terms.values())
        cert["d_squared_zero"] = all(
            _is_zero_composite(diffs[k], diffs[k + 1]) for k in diffs if k + 1 in diffs)
        cert["differentials_valid"] = all(_valid(d) for d in diffs.values())
    return WeightComplexResult(terms, diffs, tower, cert)


def _valid(f: ChainMap) -> bool:
    try:
        f.validate()
        return True
    except ValueError:
        return False


def _is_zero_composite(f: ChainMap, g: ChainMap) -> bool:
    ring = f.ring
    return all(not np.any(ring.matmul(g.at(i, x), f.at(i, x)) != 0)
               for i in f.source.terms for x in f.poset.elements)


def _amplitude_window(M: RepComplex, w: WeightStructure) -> Optional[tuple]:
    """A crude window containing all weights, from degrees and the poset height."""
    amp = M.amplitude
    if amp is None:
        return None
    h = M.poset.height + 1
    return -amp[1] - h, -amp[0] + h


def weight_range_via_t(M: RepComplex, w: WeightStructure, order: str = "forward"):
    """Support of the weight complex computed over a window wider than the range."""
    if is_contractible(M):
        return ZERO_OBJECT
    win = _amplitude_window(M, w)
    wc = weight_complex(M, w, window=win, order=order, certify=False)
    supp = wc.support()
    if not supp:
        return ZERO_OBJECT
    return WeightRange(-max(supp), -min(supp))


# ---------------------------------------------------------------------------
# filtered telescope


def _cylinder(X: ProjComplex, Y: ProjComplex, g: ProjMap, level: int):
    """``Cyl(g)`` with X as a subcomplex; returns it and the projection to Y."""
    ring = X.ring
    Xl = X.levels or {i: [level] * len(p) for i, p in X.pts.items()}
    degs = sorted(set(i - 1 for i in X.pts) | set(X.pts) | set(Y.pts))
    pts, lev, d = {}, {}, {}
    parts = {}
    for n in degs:
        a, x, y = X.size(n + 1), X.size(n), Y.size(n)
        parts[n] = (a, x, y)
        pts[n] = X.pts.get(n + 1, []) + X.pts.get(n, []) + Y.pts.get(n, [])
        lev[n] = [level] * a + list(Xl.get(n, [])) + [level] * y
    for n in degs:
        if n + 1 not in parts:
            continue
        a0, x0, y0 = parts[n]
        a1, x1, y1 = parts[n + 1]
        m = ring.zeros(a1 + x1 + y1, a0 + x0 + y0)
        m[:a1, :a0] = ring.scale(-1, X.diff(n + 1))
        if a0:
            m[a1:a1 + x1, :a0] = ring.eye(a0)
        m[a1:a1 + x1, a0:a0 + x0] = X.diff(n)
        m[a1 + x1:, :a0] = ring.scale(-1, g.at(n + 1))
        m[a1 + x1:, a0 + x0:] = Y.diff(n)
        d[n] = m
    C = ProjComplex(X.poset, ring, pts, d, levels=lev)
    comps = {}
    for n in C.pts:
        a0, x0, y0 = parts[n]
        m = ring.zeros(Y.size(n), a0 + x0 + y0)
        if x0:
            m[:, a0:a0 + x0] = g.at(n)
        if y0:
            m[:, a0 + x0:] = ring.eye(y0)
        comps[n] = m
    return C, ProjMap(C, Y, comps)


def filtered_telescope(tower: Tower, order: str = "forward") -> ProjComplex:
    """Filtered projective complex ``F_lo ⊂ ... ⊂ F_hi`` with ``F_m ≃ T_m`` (levels = m)."""
    lo, hi = tower.lo, tower.hi
    T = {m: _proj(tower.stages[m]) for m in range(lo, hi + 1)}
    F = ProjComplex(T[lo].poset, T[lo].ring, T[lo].pts, T[lo].d,
                    levels={i: [lo] * len(p) for i, p in T[lo].pts.items()})
    to_T = ProjMap(F, T[lo], {i: F.ring.eye(F.size(i)) for i in F.pts})
    for m in range(lo + 1, hi + 1):
        tm = projmap_from_chainmap(tower.maps[m], T[m - 1], T[m])
        g = to_T.then(tm)
        C, pr = _cylinder(F, T[m], g, m)
        Q, io, _ = minimize(C, order=order, respect_levels=True)
        F = Q
        to_T = io.then(pr)
    return F


# ---------------------------------------------------------------------------
# spectral sequence of the filtered Hom complex


@dataclass
class Page:
    r: int
    entries: dict          # (p, q) -> PresentedModule
    gens: dict             # (p, q) -> (num, den) cocycle data in K coordinates
    differentials: dict    # (p, q) -> matrix E_r^{p,q} -> E_r^{p+r, q-r+1} on generators


@dataclass
class SpectralPages:
    pages: dict                        # r -> Page
    infinity: dict                     # (p, q) -> PresentedModule
    abutment: dict                     # n -> {"stages": {p: module}, "quotients": {p: module}}
    p_range: tuple
    certificates: dict = field(default_factory=dict)

    def entry(self, r: int, p: int, q: int) -> PresentedModule:
        e = self.pages[r].entries.get((p, q))
        return e if e is not None else PresentedModule.zero(_ring_of(self))

    def collapse_page(self) -> int:
        """Smallest r such that every d_s with s >= r vanishes."""
        rs = sorted(self.pages)
        last = rs[0]
        for r in rs:
            if any(not _zero_map(self.pages[r], k, m) for k, m in self.pages[r].differentials.items()):
                last = r + 1
        return last

    def as_json(self) -> dict:
        out = {"p_range": list(self.p_range), "pages": {}, "infinity": {}, "abutment": {},
               "certificates": self.certificates}
        for r, pg in sorted(self.pages.items()):
            out["pages"][str(r)] = {f"{p},{q}": list(e.invariant_factors)
                                    for (p, q), e in sorted(pg.entries.items()) if not e.is_zero}
        out["infinity"] = {f"{p},{q}": list(e.invariant_factors)
                           for (p, q), e in sorted(self.infinity.items()) if not e.is_zero}
        for n, a in sorted(self.abutment.items()):
            out["abutment"][str(n)] = {"total": list(a["total"].invariant_factors),
                                       "quotients": {str(p): list(m.invariant_factors)
                                                     for p, m in sorted(a["quotients"].items())}}
        out["collapse_page"] = self.collapse_page()
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_json(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["r", "p", "q", "invariant_factors"])
        for r, pg in sorted(self.pages.items()):
            for (p, q), e in sorted(pg.entries.items()):
                wr.writerow([r, p, q, " ".join(str(f) for f in e.invariant_factors)])
        for (p, q), e in sorted(self.infinity.items()):
            wr.writerow(["inf", p, q, " ".join(str(f) for f in e.invariant_factors)])
        return buf.getvalue()


def _ring_of(sp: SpectralPages):
    for pg in sp.pages.values():
        for e in pg.entries.values():
            return e.ring
    for e in sp.infinity.values():
        return e.ring
    raise ValueError("empty spectral sequence")


def _zero_map(page: Page, key, m) -> bool:
    """A map of presented modules is zero iff every image lies in the relations."""
    p, q = key
    tgt = page.entries.get((p + page.r, q - page.r + 1))
    if tgt is None:
        return True
    ring = tgt.ring
    if tgt.relations.shape[1] == 0:
        return not np.any(m != 0)
    return solve_linear(ring, tgt.relations, m) is not None


class _FilteredHom:
    """``K = Hom(F, N)`` with the decreasing filtration ``F^p K`` (maps killing levels < p)."""

    def __init__(self, F: ProjComplex, N: RepComplex):
        self.F, self.N = F, N
        self.H = HomComplex(F, N)
        self.ring = N.ring

    def level_of_coords(self, n: int) -> list:
        off, size = self.H.offsets(n)
        out = [None] * size
        for (i, s), (o, r) in off.items():
            for k in range(r):
                out[o + k] = self.F.levels[i][s]
        return out

    def coords_ge(self, n: int, p: int) -> list:
        return [k for k, l in enumerate(self.level_of_coords(n)) if l >= p]

    def Z(self, p: int, n: int, r: Optional[int]) -> np.ndarray:
        """``{x in F^p K^n : d x in F^{p+r} K^{n+1}}`` (r=None: dx = 0)."""
        ring = self.ring
        cols = self.coords_ge(n, p)
        dim = self.H.dim(n)
        if not cols:
            return ring.zeros(dim, 0)
        D = self.H.D(n)
        if r is None:
            rows = list(range(D.shape[0]))
        else:
            lv = self.level_of_coords(n + 1)
            rows = [k for k, l in enumerate(lv) if l < p + r]
        sub = D[np.ix_(rows, cols)]
        if sub.shape[0] == 0:
            kb = ring.eye(len(cols))
        else:
            kb = kernel_basis(ring, sub)
        out = ring.zeros(dim, kb.shape[1])
        out[cols, :] = kb
        return out

    def boundaries_in(self, p: int, n: int) -> np.ndarray:
        """Generators of ``d K^{n-1} ∩ F^p K^n``."""
        ring = self.ring
        D = self.H.D(n - 1)
        if D.shape[1] == 0:
            return ring.zeros(self.H.dim(n), 0)
        lv = self.level_of_coords(n)
        rows = [k for k, l in enumerate(lv) if l < p]
        if not rows:
            return D
        kb = kernel_basis(ring, D[rows, :])
        return ring.matmul(D, kb)


def weight_spectral_sequence(M: RepComplex, N: RepComplex, w: WeightStructure,
                             order: str = "forward", max_r: Optional[int] = None) -> SpectralPages:
    """``E_1^{pq} = Hom^q(M^{-p}, N) => Hom^{p+q}(M, N)`` from the weight tower of M."""
    ring = M.ring
    tower = weight_tower(M, w, None, order)
    if tower is None:
        return SpectralPages({1: Page(1, {}, {}, {})}, {}, {}, (0, -1), {"zero_object": True})
    F = filtered_telescope(tower, order)
    K = _FilteredHom(F, N)
    lo_p, hi_p = tower.lo, tower.hi
    nlo, nhi = K.H.qrange
    L = hi_p - lo_p + 1
    R = max_r if max_r is not None else L + 1
    pages = {}
    for r in range(1, R + 1):
        entries, gens, diffs = {}, {}, {}
        for p in range(lo_p, hi_p + 1):
            for n in range(nlo - 1, nhi + 2):
                num = K.Z(p, n, r)
                den = hstack(ring, K.Z(p + 1, n, r - 1), ring.matmul(K.H.D(n - 1), K.Z(p - r + 1, n - 1, r - 1)),
                             rows=K.H.dim(n))
                if num.shape[1] == 0:
                    continue
                mod, _ = subquotient(ring, num, den)
                if mod.is_zero:
                    continue
                entries[(p, n - p)] = mod
                gens[(p, n - p)] = (num, den)
        for (p, q), (num, den) in gens.items():
            tgt = gens.get((p + r, q - r + 1))
            if tgt is None:
                continue
            img = ring.matmul(K.H.D(p + q), num)
            A = hstack(ring, tgt[0], tgt[1], rows=tgt[0].shape[0])
            x = solve_linear(ring, A, img)
            if x is None:
                raise WeightError("differential does not land in the next page")
            diffs[(p, q)] = x[:tgt[0].shape[1], :]
        pages[r] = Page(r, entries, gens, diffs)
    infinity = {}
    for p in range(lo_p, hi_p + 1):
        for n in range(nlo, nhi + 1):
            num = K.Z(p, n, None)
            if num.shape[1] == 0:
                continue
            den = hstack(ring, K.Z(p + 1, n, None), K.boundaries_in(p, n), rows=K.H.dim(n))
            mod, _ = subquotient(ring, num, den)
            if not mod.is_zero:
                infinity[(p, n - p)] = mod
    abut = abutment_filtration(M, N, tower, range(nlo, nhi + 1))
    sp = SpectralPages(pages, infinity, abut, (lo_p, hi_p))
    sp.certificates = _certify_pages(sp, M, N, tower, w)
    return sp


def abutment_filtration(M: RepComplex, N: RepComplex, tower: Tower, degrees) -> dict:
    """``W^p = ker(Hom^n(M, N) -> Hom^n(T_{p-1}, N))`` and its graded pieces."""
    ring = M.ring
    out = {}
    # maps T_{p-1} -> M by composing the tower
    to_M = {tower.hi: tower.to_M}
    for m in range(tower.hi - 1, tower.lo - 2, -1):
        to_M[m] = compose(to_M[m + 1], tower.maps[m + 1])
    for n in degrees:
        G = hom_complex(M, N).group(n)
        if G.Z.shape[1] == 0:
            continue
        stages = {}
        gens = {}
        for p in range(tower.lo, tower.hi + 2):
            Gt, Gs, T = induced_precomposition(to_M[p - 1], N, n)
            if Gs.Z.shape[1] == 0:
                gens[p] = G.Z
            else:
                K = preimage(ring, ring.matmul(T, G.Z), Gs.B)
                gens[p] = ring.matmul(G.Z, K)
            stages[p] = G.subgroup(gens[p])
        quot = {}
        for p in range(tower.lo, tower.hi + 1):
            den = hstack(ring, gens[p + 1], G.B, rows=G.Z.shape[0])
            quot[p] = subquotient(ring, gens[p], den)[0] if gens[p].shape[1] else PresentedModule.zero(ring)
        out[n] = {"total": G.module, "stages": stages, "quotients": quot}
    return out


def _homology_of_page(page: Page, nxt_key, ring):
    """H(E_r, d_r) at each spot, as presented modules on the E_r generators."""
    out = {}
    for (p, q), mod in page.entries.items():
        num0 = ring.eye(mod.generator_count)
        dout = page.differentials.get((p, q))
        if dout is not None:
            tgt = page.entries[(p + page.r, q - page.r + 1)]
            ker = preimage(ring, dout, tgt.relations)
        else:
            ker = num0
        src_key = (p - page.r, q + page.r - 1)
        din = page.differentials.get(src_key)
        den = mod.relations
        if din is not None:
            den = hstack(ring, den, din, rows=mod.generator_count)
        if ker.shape[1] == 0:
            continue
        h, _ = subquotient(ring, ker, den)
        if not h.is_zero:
            out[(p, q)] = h
    return out


def _certify_pages(sp: SpectralPages, M, N, tower, w) -> dict:
    cert = {}
    ring = M.ring
    ok = True
    rs = sorted(sp.pages)
    for r in rs[:-1]:
        h = _homology_of_page(sp.pages[r], None, ring)
        nxt = sp.pages[r + 1].entries
        keys = set(h) | set(nxt)
        for k in keys:
            a = h.get(k, PresentedModule.zero(ring))
            b = nxt.get(k, PresentedModule.zero(ring))
            if not modules_isomorphic(a, b):
                ok = False
    cert["next_page_is_homology"] = ok
    last = sp.pages[rs[-1]].entries
    keys = set(last) | set(sp.infinity)
    cert["last_page_is_infinity"] = all(
        modules_isomorphic(last.get(k, PresentedModule.zero(ring)), sp.infinity.get(k, PresentedModule.zero(ring)))
        for k in keys)
    conv = True
    for n, a in sp.abutment.items():
        for p, qm in a["quotients"].items():
            e = sp.infinity.get((p, n - p), PresentedModule.zero(ring))
            if not modules_isomorphic(e, qm):
                conv = False
    for (p, q), e in sp.infinity.items():
        n = p + q
        if n not in sp.abutment and not e.is_zero:
            conv = False
    cert["infinity_matches_abutment"] = conv
    e1 = sp.pages[1].entries
    good = True
    for m in range(tower.lo, tower.hi + 1):
        G = Cone(tower.maps[m]).complex
        H = hom_complex(G, N)
        lo, hi = H.qrange
        for n in range(lo, hi + 1):
            if not modules_isomorphic(H.group(n).module, e1.get((m, n - m), PresentedModule.zero(ring))):
                good = False
        for (p, q), e in e1.items():
            if p == m and not (lo <= p + q <= hi) and not e.is_zero:
                good = False
    cert["e1_matches_weight_complex"] = good
    return cert


# ---------------------------------------------------------------------------
# weight filtration


def weight_filtration(M: RepComplex, N: RepComplex, m: int, w: WeightStructure, q: int = 0,
                      order: str = "forward"):
    """``W^m = Im(Hom^q(w_{>=m} M, N) -> Hom^q(M, N))`` as a presented module.

    Returns ``(module, generators)`` with generators as cocycles of ``Hom(M, N)``.
    """
    d = w.decompose(M, m - 1, order)
    Gt, Gs, T = induced_precomposition(d.to_A, N, q)
    gens = image_in(Gt, Gs, T)
    return Gs.subgroup(gens), gens


# ---------------------------------------------------------------------------
# K_0 and Euler characteristics


@dataclass
class HeartRegistry:
    names: list
    objects: list
    basis: np.ndarray      # columns: stalk Euler characteristic vectors

    def coefficients(self, vec) -> Optional[list]:
        Zr = CoefficientRing.integers()
        x = solve_linear(Zr, Zr.array(self.basis.tolist(), shape=self.basis.shape), Zr.vector(vec))
        return None if x is None else [int(c) for c in x]


def _euler_vector(M: RepComplex) -> list:
    e = M.euler_ranks()
    return [e[x] for x in M.poset.elements]


def default_registry(w: WeightStructure) -> HeartRegistry:
    """``E_x``: extension by zero from the closure of x of ``Rj_*`` of the rank-one sheaf at x."""
    from .complexes import point_sheaf
    P, ring = w.poset, w.ring
    names, objs = [], []
    for x in P.elements:
        down = P.sub(P.down(x))
        d = open_closed_split(down, [y for y in down.elements if y != x])
        E = extend_by_zero(derived_pushforward_open(point_sheaf(d.U, ring, x), d), P)
        E.name = f"E_{x}"
        names.append(E.name)
        objs.append(E)
    basis = np.array([_euler_vector(E) for E in objs], dtype=object).T.reshape(len(P.elements), len(objs))
    return HeartRegistry(names, objs, basis)


def euler_class(M: RepComplex, w: WeightStructure, registry: Optional[HeartRegistry] = None) -> dict:
    """``χ(M) = Σ (-1)^k [t(M)^k]`` in the free group on the registered heart objects."""
    reg = registry or default_registry(w)
    wc = weight_complex(M, w, certify=False)
    total = [0] * len(reg.names)
    for k, T in wc.terms.items():
        vec = _euler_vector(T)
        c = reg.coefficients(vec)
        if c is None:
            raise UnregisteredHeartSummand(f"weight-complex term in degree {k} does not split over the registry")
        s = -1 if k % 2 else 1
        total = [a + s * b for a, b in zip(total, c)]
    return {n: c for n, c in zip(reg.names, total) if c}


def k0_audit(heart_corpus: Sequence[RepComplex], triangles: Sequence[tuple], w: WeightStructure,
             registry: Optional[HeartRegistry] = None) -> dict:
    """Check χ on heart objects, split sums and distinguished triangles ``(A, B, C)``."""
    reg = registry or default_registry(w)
    from .complexes import direct_sum
    rows = []
    heart_ok = True
    for k, H in enumerate(heart_corpus):
        if not w.in_heart(H):
            heart_ok = False
            rows.append({"object": H.name or f"#{k}", "in_heart": False})
    split_bad = []
    hc = list(heart_corpus)
    for a in range(len(hc)):
        for b in range(a, len(hc)):
            s = direct_sum(hc[a], hc[b])
            if _add(euler_class(hc[a], w, reg), euler_class(hc[b], w, reg)) != euler_class(s, w, reg):
                split_bad.append([a, b])
    tri_bad = []
    for k, (A, B, C) in enumerate(triangles):
        if _add(euler_class(A, w, reg), euler_class(C, w, reg)) != euler_class(B, w, reg):
            tri_bad.append(k)
    return {"heart_objects": len(hc), "heart_certified": heart_ok, "split_violations": split_bad,
            "triangles": len(triangles), "triangle_violations": tri_bad,
            "additive": heart_ok and not split_bad and not tri_bad, "details": rows}


def _add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
        if out[k] == 0:
            del out[k]
    return out
