"""Acceptance suite: one PASS/FAIL line per criterion (also shown in the pytest summary)."""
import io
import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from weightglue import (ZERO_OBJECT, CoefficientRing, build_glued_ws, derived_hom, direct_sum,
                        is_contractible, shift, verify_gluing_axioms, weight_range_via_t)
from weightglue.cli import execute
from weightglue.gluing import hom_filtration, integral_part, pointwise_detection
from weightglue.linalg import modules_isomorphic
from weightglue.poset_model import gluing_triangle
from weightglue.weight_core import check_weight_exactness
from weightglue.weight_invariants import (euler_class, k0_audit, weight_complex, weight_filtration,
                                          weight_spectral_sequence)
from weightglue.sampling import orthogonality_pairs, random_cone_triangle, random_corpus, random_object

import conftest
from golden_cases import CASES

ROOT = Path(__file__).resolve().parent.parent
RINGS = {"Z": CoefficientRing.integers(), "F2": CoefficientRing.prime_field(2),
         "Z/4": CoefficientRing.integers_mod(4)}
FIXTURES = ["s2", "chain3", "diamond"]


def fixture(name, ring="Z"):
    data = json.loads((ROOT / "fixtures" / f"{name}.json").read_text())
    data["ring"] = ring
    from weightglue.cli import Fixture
    return Fixture(data, name)


class Tally:
    def __init__(self):
        self.checks = 0
        self.failures = []

    def __call__(self, ok, what=""):
        self.checks += 1
        if not ok:
            self.failures.append(what)


@contextmanager
def criterion(n, title, budget=None):
    t = Tally()
    start = time.perf_counter()
    yield t
    elapsed = time.perf_counter() - start
    ok = not t.failures and (budget is None or elapsed < budget)
    extra = f"{t.checks} checks, {elapsed:.1f}s" + (f" (budget {budget}s)" if budget else "")
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} [{extra}]"
    if t.failures:
        line += f" first failures: {t.failures[:3]}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_gluing_axioms():
    with criterion(1, "gluing-datum axioms on S2, 3-chain, diamond over Z, F2, Z/4", budget=120) as check:
        for name in FIXTURES:
            for rname in RINGS:
                fx = fixture(name, rname)
                samples = list(fx.objects.values()) + random_corpus(fx.poset, fx.ring, 50, seed=1)
                rep = verify_gluing_axioms(fx.datum(), samples)
                for row in rep["samples"]:
                    check(row["passed"], (name, rname, row["sample"], row["checks"]))


def test_criterion_02_weight_structure_axioms():
    with criterion(2, "glued weight structure: orthogonality, shifts, retracts, boundedness", budget=180) as check:
        for name in FIXTURES:
            for rname in RINGS:
                fx = fixture(name, rname)
                w = build_glued_ws(fx.strat, fx.ring)
                for k, (X, Y) in enumerate(orthogonality_pairs(w, 200, seed=2)):
                    check(w.is_le(X, 0) and w.is_ge(Y, 0), (name, rname, k, "side"))
                    check(derived_hom(X, Y)[1].is_zero, (name, rname, k, "orthogonality"))
                corpus = list(fx.objects.values()) + random_corpus(fx.poset, fx.ring, 20, seed=3)
                for M, N in zip(corpus, corpus[1:]):
                    r = w.weight_range(M)
                    check(r is ZERO_OBJECT or r.lo <= r.hi, (name, rname, "range"))
                    r1 = w.weight_range(shift(M, 1))
                    check(r is ZERO_OBJECT or (r1.lo, r1.hi) == (r.lo + 1, r.hi + 1), (name, rname, "shift"))
                    S = direct_sum(M, N)
                    for m in (-1, 0, 1):
                        check(w.is_le(S, m) == (w.is_le(M, m) and w.is_le(N, m)), (name, rname, "retract le"))
                        check(w.is_ge(S, m) == (w.is_ge(M, m) and w.is_ge(N, m)), (name, rname, "retract ge"))


def test_criterion_03_decomposition():
    with criterion(3, "weight decompositions certified, oracle agreement 100%") as check:
        for name in FIXTURES:
            fx = fixture(name)
            w = build_glued_ws(fx.strat, fx.ring)
            for k, M in enumerate(random_corpus(fx.poset, fx.ring, 100, seed=4)):
                r = w.weight_range(M)
                ms = (0,) if r is ZERO_OBJECT else range(r.lo - 1, r.hi + 1)
                for m in ms:
                    d = w.decompose(M, m)
                    check(d.certified, (name, k, m, d.certificates))
                    check(is_contractible(d.B) == w.is_ge(M, m + 1), (name, k, m, "B"))
                    check(is_contractible(d.A) == w.is_le(M, m), (name, k, m, "A"))


def test_criterion_04_adjunctions():
    with criterion(4, "four adjunction isomorphisms, degreewise, 50 pairs each") as check:
        for name in FIXTURES:
            fx = fixture(name)
            d = fx.datum()
            Ms = random_corpus(fx.poset, fx.ring, 50, seed=5)
            Us = random_corpus(d.U, fx.ring, 51, seed=6)
            Zs = random_corpus(d.Z, fx.ring, 50, seed=7)
            for k in range(50):
                M, X, Y, W = Ms[k], Us[k], Us[k + 1], Zs[k]
                pairs = {"j_!": ((d.j_shriek(X), M), (X, d.j_upper(M))),
                         "Rj_*": ((d.j_upper(M), Y), (M, d.j_lower(Y))),
                         "i^*": ((d.i_upper(M), W), (M, d.i_lower(W))),
                         "i^!": ((d.i_lower(W), M), (W, d.i_shriek(M)))}
                for key, ((a, b), (c, e)) in pairs.items():
                    h1, h2 = derived_hom(a, b), derived_hom(c, e)
                    lo = min(h1.qrange[0], h2.qrange[0])
                    hi = max(h1.qrange[1], h2.qrange[1])
                    for q in range(lo, hi + 1):
                        check(modules_isomorphic(h1[q], h2[q]), (name, key, k, q))


def test_criterion_05_exactness_table():
    with criterion(5, "weight-exactness table; j_! witness Hom(i_* gen[-1], j_! gen) = Z") as check:
        for name in FIXTURES:
            fx = fixture(name)
            w = build_glued_ws(fx.strat, fx.ring)
            d = w.datum
            on_U = random_corpus(d.U, fx.ring, 30, seed=8)
            on_Z = random_corpus(d.Z, fx.ring, 30, seed=9)
            amb = random_corpus(fx.poset, fx.ring, 30, seed=10)
            r = check_weight_exactness(d.i_lower, w.closed_ws, w, on_Z, "i_*")
            check(r["left"]["exact"] and r["right"]["exact"], (name, r))
            r = check_weight_exactness(d.j_upper, w, w.open_ws, amb, "j^*")
            check(r["left"]["exact"] and r["right"]["exact"], (name, r))
            r = check_weight_exactness(d.j_shriek, w.open_ws, w, on_U, "j_!")
            check(r["left"]["exact"] and not r["right"]["exact"], (name, r))
        s2 = fixture("s2")
        h = derived_hom(shift(s2.object("ZZ"), -1), s2.object("ZU"))
        check(h[0].invariant_factors == (0,), ("witness", h[0].invariant_factors))


def _corpus(name, n=25, seed=11):
    fx = fixture(name)
    return fx, list(fx.objects.values()) + random_corpus(fx.poset, fx.ring, n, seed=seed)


def test_criterion_06_weight_complex():
    with criterion(6, "weight complex conservative, detects range; heart objects give one term") as check:
        for name in FIXTURES:
            fx, corpus = _corpus(name)
            w = build_glued_ws(fx.strat, fx.ring)
            rng = np.random.default_rng(19)
            corpus += [random_cone_triangle(fx.poset, fx.ring, rng)[2] for _ in range(5)]
            for M in corpus:
                wc = weight_complex(M, w)
                check(all(wc.certificates.values()), (name, M.name, wc.certificates))
                check((wc.support() == []) == is_contractible(M), (name, M.name, "conservative"))
                r, rt = w.weight_range(M), weight_range_via_t(M, w)
                check((r is ZERO_OBJECT and rt is ZERO_OBJECT) or
                      (r is not ZERO_OBJECT and rt is not ZERO_OBJECT and tuple(r) == tuple(rt)), (name, M.name, r, rt))
                if w.in_heart(M) and r is not ZERO_OBJECT:
                    check(wc.support() == [0], (name, M.name, "heart"))
                for T in wc.terms.values():
                    if not is_contractible(T):
                        check(weight_complex(T, w).support() == [0], (name, "term one-term"))


def test_criterion_07_spectral_sequence():
    with criterion(7, "E_inf = abutment quotients; heart collapse at E_1; E_2 order-independent", budget=300) as check:
        rng = np.random.default_rng(12)
        for k in range(30):
            name = FIXTURES[k % 3]
            fx = fixture(name)
            w = build_glued_ws(fx.strat, fx.ring)
            M = random_object(fx.poset, fx.ring, rng)
            N = random_object(fx.poset, fx.ring, rng)
            sp = weight_spectral_sequence(M, N, w)
            check(all(sp.certificates.values()), (name, k, sp.certificates))
            for n, a in sp.abutment.items():
                check(modules_isomorphic(a["total"], derived_hom(M, N)[n]), (name, k, n, "total"))
                for p, quo in a["quotients"].items():
                    check(quo.invariant_factors == sp.infinity.get((p, n - p), quo.__class__.zero(fx.ring)).invariant_factors,
                          (name, k, n, p))
            sp2 = weight_spectral_sequence(M, N, w, order="reverse")
            for key in set(sp.pages[2].entries) | set(sp2.pages.get(2, sp2.pages[1]).entries):
                check(sp.entry(2, *key).invariant_factors == sp2.entry(2, *key).invariant_factors, (name, k, key))
            for T in weight_complex(M, w).terms.values():
                if not is_contractible(T):
                    check(weight_spectral_sequence(T, N, w).collapse_page() == 1, (name, k, "heart collapse"))
                    break


def test_criterion_08_k0():
    with criterion(8, "chi additive on cone and gluing triangles; chi(CONST) = [ZZ] + [ZU]") as check:
        fx = fixture("chain3")
        w = build_glued_ws(fx.strat, fx.ring)
        rng = np.random.default_rng(13)
        tris = [random_cone_triangle(fx.poset, fx.ring, rng) for _ in range(100)]
        audit = k0_audit([], tris, w)
        check(audit["triangle_violations"] == [], audit["triangle_violations"])
        for name in FIXTURES:
            fx, corpus = _corpus(name, n=15, seed=14)
            w = build_glued_ws(fx.strat, fx.ring)
            d = fx.datum()
            gl = []
            for M in corpus:
                for side in ("lower", "upper"):
                    first, _, third = gluing_triangle(M, d, side).objects
                    gl.append((first, M, third))
            audit = k0_audit([], gl, w)
            check(audit["additive"], (name, audit["triangle_violations"]))
        s2 = fixture("s2")
        w = build_glued_ws(s2.strat, s2.ring)
        a = euler_class(s2.object("CONST"), w)
        b = euler_class(s2.object("ZZ"), w)
        c = euler_class(s2.object("ZU"), w)
        total = {k: b.get(k, 0) + c.get(k, 0) for k in set(b) | set(c)}
        check(a == {k: v for k, v in total.items() if v}, (a, b, c))


def test_criterion_09_hom_filtration():
    with criterion(9, "Hom filtration factors compose to the total (incl. Z/4 orders)") as check:
        n_torsion = 0
        for rname in ("Z", "Z/4"):
            for name in FIXTURES:
                fx = fixture(name, rname)
                Ms = random_corpus(fx.poset, fx.ring, 50, seed=15)
                Ns = random_corpus(fx.poset, fx.ring, 50, seed=16)
                for k, (M, N) in enumerate(zip(Ms, Ns)):
                    hf = hom_filtration(M, N, fx.strat)
                    check(all(hf.certificates.values()), (rname, name, k, hf.certificates))
                    if rname == "Z/4":
                        check("orders_multiply" in hf.certificates, (name, k, "orders"))
                        n_torsion += not hf.total.is_zero
        check(n_torsion > 0, "no nonzero Z/4 groups sampled")


def test_criterion_10_pointwise():
    with criterion(10, "pointwise verdicts equal global membership on the 3-chain corpus") as check:
        fx, corpus = _corpus("chain3", n=60, seed=17)
        w = build_glued_ws(fx.strat, fx.ring)
        for M in corpus:
            for m in (-1, 0, 1):
                check(pointwise_detection(M, w, m)["agree"], (M.name, m))


def test_criterion_11_integral_part():
    with criterion(11, "integral part equals W^0 on 20 heart objects; S2 example gives R") as check:
        hearts = []
        rng = np.random.default_rng(18)
        for name in ("s2", "chain3"):
            fx = fixture(name)
            w = build_glued_ws(fx.strat, fx.ring)
            found = []
            while len(found) < 10:
                for T in weight_complex(random_object(fx.poset, fx.ring, rng), w).terms.values():
                    if not is_contractible(T) and len(found) < 10:
                        found.append(T)
            hearts += [(w, T, found[(k + 1) % 10]) for k, T in enumerate(found)]
        for w, M, N in hearts:
            d = w.datum
            check(w.in_heart(M), "not heart")
            ip = integral_part(M, d, N, w)
            W0, _ = weight_filtration(d.j_shriek(d.j_upper(M)), N, 0, w)
            check(modules_isomorphic(ip, W0), (ip.invariant_factors, W0.invariant_factors))
        s2 = fixture("s2")
        w = build_glued_ws(s2.strat, s2.ring)
        C = s2.object("CONST")
        check(integral_part(C, s2.datum(), C, w).invariant_factors == (0,), "S2 example")


def test_criterion_12_cli_goldens():
    import os
    import subprocess
    import sys
    with criterion(12, "CLI goldens byte-identical across runs") as check:
        for name, argv in CASES.items():
            runs = []
            for _ in range(2):
                buf = io.StringIO()
                cwd = os.getcwd()
                os.chdir(ROOT)
                try:
                    code = execute(argv + ["--json"], out=buf)
                finally:
                    os.chdir(cwd)
                runs.append(buf.getvalue())
                check(code == 0, (name, code))
            golden = (ROOT / "tests" / "goldens" / f"{name}.json").read_text()
            check(runs[0] == runs[1] == golden, name)
        p = subprocess.run([sys.executable, "-m", "weightglue.cli"] + CASES["chain3_ss"] + ["--json"],
                           capture_output=True, text=True, cwd=ROOT)
        check(p.stdout == (ROOT / "tests" / "goldens" / "chain3_ss.json").read_text(), "fresh process")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
