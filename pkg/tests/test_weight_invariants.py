import csv
import io
import json

import numpy as np
import pytest

from weightglue import (ZERO_OBJECT, ChainMap, CoefficientRing, Cone, build_glued_ws, chain_poset, derived_hom,
                        direct_sum, is_contractible, shift, singleton_stratification, weight_range_via_t)
from weightglue.homotopy_engine import hom_complex
from weightglue.linalg import hstack, in_span, modules_isomorphic
from weightglue.poset_model import gluing_triangle
from weightglue.weight_invariants import (UnregisteredHeartSummand, default_registry, euler_class, k0_audit,
                                          weight_complex, weight_filtration, weight_spectral_sequence)
from weightglue.sampling import random_cone_triangle, random_corpus, random_derived_map

from conftest import diamond
from test_weight_core import cohomology_table

Z = CoefficientRing.integers()
POSETS = [chain_poset(["z", "u"]), chain_poset("abc"), diamond()]
IDS = ["s2", "chain3", "diamond"]


def mix(s2):
    return direct_sum(shift(s2.ZZ, -1), shift(s2.ZU, 1))


def test_weight_complex_examples(s2):
    wc = weight_complex(s2.CONST, s2.w)
    assert wc.support() == [0]
    assert cohomology_table(wc.terms[0]) == cohomology_table(s2.CONST)
    assert all(wc.certificates.values())
    wc = weight_complex(Cone(ChainMap.identity(s2.CONST)).complex, s2.w)
    assert wc.terms == {} and wc.support() == []
    # ZU[1] spans weights 0 and 1: terms ZZ (degree 0) and CONST[-1] shifted into degree -1
    wc = weight_complex(shift(s2.ZU, 1), s2.w)
    assert wc.support() == [-1, 0]
    assert cohomology_table(wc.terms[-1]) == cohomology_table(s2.CONST)
    assert cohomology_table(wc.terms[0]) == cohomology_table(s2.ZZ)
    assert all(wc.certificates.values())


def test_range_via_t_examples(s2):
    assert tuple(weight_range_via_t(s2.CONST, s2.w)) == (0, 0)
    assert tuple(weight_range_via_t(mix(s2), s2.w)) == (-1, 1)
    assert weight_range_via_t(Cone(ChainMap.identity(s2.ZU)).complex, s2.w) is ZERO_OBJECT


@pytest.mark.parametrize("P", POSETS, ids=IDS)
def test_conservative_and_range(P):
    w = build_glued_ws(singleton_stratification(P), Z)
    corpus = random_corpus(P, Z, 15, seed=1)
    corpus += [Cone(ChainMap.identity(M)).complex for M in corpus[:3]]
    for M in corpus:
        wc = weight_complex(M, w)
        assert all(wc.certificates.values())
        assert (wc.support() == []) == is_contractible(M)
        r, rt = w.weight_range(M), weight_range_via_t(M, w)
        assert (r is ZERO_OBJECT and rt is ZERO_OBJECT) or tuple(r) == tuple(rt)
        if r is not ZERO_OBJECT:
            assert wc.support() and min(wc.support()) == -r.hi and max(wc.support()) == -r.lo


def test_heart_objects_have_one_term(s2):
    for M in (s2.CONST, s2.ZZ, direct_sum(s2.CONST, s2.ZZ)):
        assert weight_complex(M, s2.w).support() == [0]


def test_ss_examples(s2):
    sp = weight_spectral_sequence(s2.CONST, s2.ZZ, s2.w)
    assert {k: e.invariant_factors for k, e in sp.pages[1].entries.items()} == {(0, 0): (0,)}
    assert sp.collapse_page() == 1
    assert sp.abutment[0]["total"].invariant_factors == (0,)
    sp = weight_spectral_sequence(mix(s2), s2.CONST, s2.w)
    assert sp.p_range == (-1, 1)
    assert all(sp.certificates.values())
    for n, a in sp.abutment.items():
        total = derived_hom(mix(s2), s2.CONST)[n]
        assert modules_isomorphic(a["total"], total)


@pytest.mark.parametrize("P", POSETS[:2], ids=IDS[:2])
def test_ss_random(P):
    w = build_glued_ws(singleton_stratification(P), Z)
    rng = np.random.default_rng(2)
    Ms = random_corpus(P, Z, 10, seed=3)
    Ns = random_corpus(P, Z, 10, seed=4)
    for M, N in zip(Ms, Ns):
        sp = weight_spectral_sequence(M, N, w)
        assert all(sp.certificates.values()), sp.certificates
        r = w.weight_range(M)
        if r is not ZERO_OBJECT:
            assert sp.collapse_page() <= r.hi - r.lo + 1
        sp2 = weight_spectral_sequence(M, N, w, order="reverse")
        keys = set(sp.pages[2].entries) | set(sp2.pages[2].entries)
        for k in keys:
            assert sp.entry(2, *k).invariant_factors == sp2.entry(2, *k).invariant_factors


def test_ss_export(s2):
    sp = weight_spectral_sequence(mix(s2), s2.CONST, s2.w)
    data = json.loads(sp.to_json())
    assert data["p_range"] == [-1, 1]
    rows = list(csv.reader(io.StringIO(sp.to_csv())))
    assert rows[0] == ["r", "p", "q", "invariant_factors"]
    assert any(r[0] == "inf" for r in rows[1:])


def test_weight_filtration_examples(s2):
    M = s2.CONST
    W, _ = weight_filtration(M, s2.CONST, 0, s2.w)
    assert W.invariant_factors == (0,)
    assert weight_filtration(M, s2.CONST, -3, s2.w)[0].invariant_factors == (0,)
    assert weight_filtration(M, s2.CONST, 3, s2.w)[0].is_zero


@pytest.mark.parametrize("P", POSETS[:2], ids=IDS[:2])
def test_weight_filtration_nested_and_order_free(P):
    w = build_glued_ws(singleton_stratification(P), Z)
    for M, N in zip(random_corpus(P, Z, 8, seed=5), random_corpus(P, Z, 8, seed=6)):
        r = w.weight_range(M)
        if r is ZERO_OBJECT:
            continue
        for q in (-1, 0, 1):
            total = derived_hom(M, N)[q]
            stages = [weight_filtration(M, N, m, w, q) for m in range(r.lo, r.hi + 2)]
            assert modules_isomorphic(stages[0][0], total)
            assert stages[-1][0].is_zero
            B = hom_complex(M, N).group(q).B
            for (_, big), (_, small) in zip(stages, stages[1:]):
                span = hstack(Z, big, B, rows=B.shape[0])
                assert all(in_span(Z, span, small[:, k]) for k in range(small.shape[1]))
            for m in range(r.lo, r.hi + 1):
                a = weight_filtration(M, N, m, w, q)[0]
                b = weight_filtration(M, N, m, w, q, order="reverse")[0]
                assert modules_isomorphic(a, b)


def test_euler_examples(s2):
    w = s2.w
    assert euler_class(s2.CONST, w) == _add(euler_class(s2.ZZ, w), euler_class(s2.ZU, w))
    for M in random_corpus(s2.P, Z, 10, seed=7):
        assert euler_class(shift(M, 1), w) == {k: -v for k, v in euler_class(M, w).items()}
    audit = k0_audit([s2.ZZ, s2.CONST], [(s2.ZU, s2.CONST, s2.ZZ)], w)
    assert audit["additive"]
    assert k0_audit([s2.ZZ, s2.CONST], [], w)["additive"]


def test_unregistered_summand(s2):
    reg = default_registry(s2.w)
    reg.basis = reg.basis[:, :1]
    reg.names = reg.names[:1]
    with pytest.raises(UnregisteredHeartSummand):
        euler_class(s2.CONST if reg.names == ["E_z"] else s2.ZZ, s2.w, reg)


def test_euler_cone_triangles(chain3):
    w = build_glued_ws(singleton_stratification(chain3), Z)
    rng = np.random.default_rng(8)
    tris = [random_cone_triangle(chain3, Z, rng) for _ in range(30)]
    assert k0_audit([], tris, w)["triangle_violations"] == []


def _add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
        if not out[k]:
            del out[k]
    return out
