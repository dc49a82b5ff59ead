"""Command line front end: fixture loading, command dispatch and JSON reports.

Fixture format (JSON, documented in ``fixtures/README.md``)::

    {
      "ring": "Z",
      "poset": {"elements": ["z", "u"], "covers": [["z", "u"]]},
      "objects": {
        "CONST": {"constant": {"support": ["z", "u"], "degree": 0}},
        "X":     {"complex": {"terms": {"0": {"ranks": {...}, "maps": [...]}}, "diffs": {...}}},
        "MIX":   {"sum": [{"object": "ZZ", "shift": -1}, {"object": "ZU", "shift": 1}]}
      },
      "closed": ["z"],
      "stratification": [["u"], ["z"]],
      "params": {"object": "CONST", "target": "CONST", "m": 0}
    }

Matrices are ``{"shape": [rows, cols], "data": [row-major entries]}``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .complexes import (ComplexError, PosetRep, RepComplex, constant_sheaf, direct_sum,
                        representable, shift)
from .homotopy_engine import derived_hom, is_contractible, model
from .linalg import kernel_basis, subquotient
from .poset import Poset, PosetError
from .poset_model import gluing_triangle, open_closed_split, verify_gluing_axioms
from .rings import RingError, parse_ring
from .gluing import (Stratification, build_glued_ws, hom_filtration, integral_part,
                     pointwise_detection, singleton_stratification)
from .sampling import orthogonality_pairs, random_corpus
from .weight_core import ZERO_OBJECT, NegativityFailure, WeightError
from .weight_invariants import euler_class, k0_audit, weight_complex, weight_filtration, weight_spectral_sequence

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 20


class FixtureError(ValueError):
    """Malformed or inconsistent fixture."""


# ---------------------------------------------------------------------------
# fixture parsing


def _matrix(ring, spec, rows: int, cols: int, what: str) -> np.ndarray:
    if not isinstance(spec, dict) or "shape" not in spec or "data" not in spec:
        raise FixtureError(f"{what}: matrix needs 'shape' and 'data'")
    r, c = spec["shape"]
    if (r, c) != (rows, cols):
        raise FixtureError(f"{what}: shape {[r, c]} but expected {[rows, cols]}")
    data = spec["data"]
    if len(data) != r * c:
        raise FixtureError(f"{what}: {len(data)} entries for shape {[r, c]}")
    if not all(isinstance(v, int) for v in data):
        raise FixtureError(f"{what}: entries must be integers")
    return ring.array([data[k * c:(k + 1) * c] for k in range(r)], shape=(r, c))


def matrix_json(a: np.ndarray) -> dict:
    return {"shape": [int(a.shape[0]), int(a.shape[1])], "data": [_num(v) for v in a.reshape(-1)]}


def _num(v):
    from fractions import Fraction
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return int(v)


class Fixture:
    def __init__(self, data: dict, source: str = "<memory>"):
        self.source = source
        if not isinstance(data, dict):
            raise FixtureError("fixture must be a JSON object")
        try:
            self.ring = parse_ring(str(data.get("ring", "Z")))
        except RingError as e:
            raise FixtureError(f"ring: {e}") from e
        pj = data.get("poset")
        if not isinstance(pj, dict) or "elements" not in pj:
            raise FixtureError("poset: needs 'elements' (and 'covers')")
        els = [str(x) for x in pj["elements"]]
        covers = [tuple(map(str, c)) for c in pj.get("covers", [])]
        for c in covers:
            if len(c) != 2 or c[0] not in els or c[1] not in els:
                raise FixtureError(f"poset: bad cover {list(c)}")
        self.poset = Poset(els, covers)
        self.params = dict(data.get("params", {}))
        self._specs = dict(data.get("objects", {}))
        self.objects: dict[str, RepComplex] = {}
        for name in self._specs:
            self.object(name)
        self.closed = data.get("closed")
        st = data.get("stratification")
        hearts = data.get("hearts")
        if st is None:
            self.strat = singleton_stratification(self.poset)
        else:
            self.strat = Stratification(self.poset, [[str(x) for x in S] for S in st])
        if hearts is not None:
            self.strat.hearts = self._hearts(hearts)

    def _hearts(self, hearts) -> list:
        if len(hearts) != len(self.strat.strata):
            raise FixtureError("hearts: one generator list per stratum")
        out = []
        for l, gens in enumerate(hearts):
            sub = self.strat.stratum_poset(l)
            out.append([self._build(sub, g, f"hearts[{l}]") for g in gens])
        return out

    def object(self, name: str) -> RepComplex:
        if name in self.objects:
            return self.objects[name]
        if name not in self._specs:
            raise FixtureError(f"unknown object {name!r}")
        self.objects[name] = None       # cycle guard
        M = self._build(self.poset, self._specs[name], name)
        M.name = name
        self.objects[name] = M
        return M

    def _build(self, P: Poset, spec, what: str) -> RepComplex:
        ring = self.ring
        if not isinstance(spec, dict) or len(spec) != 1:
            raise FixtureError(f"{what}: object spec must have exactly one of constant/representable/sum/complex")
        kind, body = next(iter(spec.items()))
        try:
            if kind == "constant":
                supp = body.get("support", list(P.elements))
                for x in supp:
                    if x not in P:
                        raise FixtureError(f"{what}: unknown element {x!r}")
                return constant_sheaf(P, ring, supp, int(body.get("degree", 0)))
            if kind == "representable":
                if body.get("point") not in P:
                    raise FixtureError(f"{what}: unknown point {body.get('point')!r}")
                return representable(P, ring, body["point"], int(body.get("degree", 0)))
            if kind == "sum":
                parts = []
                for item in body:
                    ref = self.object(item["object"]) if P is self.poset else None
                    if ref is None:
                        raise FixtureError(f"{what}: bad or cyclic reference {item.get('object')!r}")
                    parts.append(shift(ref, int(item.get("shift", 0))))
                return direct_sum(*parts)
            if kind == "complex":
                return self._complex(P, body, what)
        except ComplexError as e:
            raise FixtureError(f"{what}: {e}") from e
        except (KeyError, TypeError) as e:
            raise FixtureError(f"{what}: malformed ({e})") from e
        raise FixtureError(f"{what}: unknown object kind {kind!r}")

    def _complex(self, P: Poset, body: dict, what: str) -> RepComplex:
        ring = self.ring
        terms = {}
        for deg, t in body.get("terms", {}).items():
            ranks = {x: int(t.get("ranks", {}).get(x, 0)) for x in P.elements}
            cm = {}
            for m in t.get("maps", []):
                x, y = m["from"], m["to"]
                cm[(x, y)] = _matrix(ring, m["matrix"], ranks[y], ranks[x], f"{what}: term {deg} map {x}->{y}")
            terms[int(deg)] = PosetRep.from_covers(P, ring, ranks, cm)
        diffs = {}
        for deg, dd in body.get("diffs", {}).items():
            i = int(deg)
            if i not in terms or i + 1 not in terms:
                raise FixtureError(f"{what}: differential {i} needs terms {i} and {i + 1}")
            diffs[i] = {x: _matrix(ring, dd[x], terms[i + 1].ranks[x], terms[i].ranks[x], f"{what}: d^{i} at {x}")
                        if x in dd else ring.zeros(terms[i + 1].ranks[x], terms[i].ranks[x]) for x in P.elements}
        try:
            return RepComplex(P, ring, terms, diffs, check=True)
        except ValueError as e:
            raise FixtureError(f"{what}: {e}") from e

    def datum(self):
        Z = self.closed if self.closed is not None else self.strat.closed_union(1) if len(self.strat.strata) > 1 else []
        return open_closed_split(self.poset, Z)


def load_fixture(path: str) -> Fixture:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise FixtureError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise FixtureError(f"{path}: invalid JSON ({e})") from e
    return Fixture(data, path)


def complex_json(M: RepComplex) -> dict:
    """Serialize to the fixture ``complex`` form (transitions on covers only)."""
    terms, diffs = {}, {}
    for i, t in M.terms.items():
        maps = [{"from": x, "to": y, "matrix": matrix_json(t.transition(x, y))} for x, y in M.poset.covers
                if t.ranks[x] and t.ranks[y]]
        terms[str(i)] = {"ranks": {x: t.ranks[x] for x in M.poset.elements if t.ranks[x]}, "maps": maps}
    for i, dd in M.diffs.items():
        diffs[str(i)] = {x: matrix_json(a) for x, a in dd.items() if a.size}
    return {"complex": {"terms": terms, "diffs": diffs}}


# ---------------------------------------------------------------------------
# report helpers


def pointwise_cohomology(M: RepComplex) -> dict:
    """Invariant factors of ``H^i(M(x))`` for every degree and point (nonzero only)."""
    ring = M.ring
    out = {}
    for i in M.degrees:
        row = {}
        for x in M.poset.elements:
            n = M.rank(i, x)
            if not n:
                continue
            dout = M.d(i, x)
            ker = kernel_basis(ring, dout) if dout.shape[0] else ring.eye(n)
            din = M.d(i - 1, x)
            mod, _ = subquotient(ring, ker, din)
            if not mod.is_zero:
                row[x] = list(mod.invariant_factors)
        if row:
            out[str(i)] = row
    return out


def object_json(M: RepComplex) -> dict:
    mp = model(M).P
    return {"zero": is_contractible(M),
            "cohomology": pointwise_cohomology(M),
            "model": {str(i): list(p) for i, p in mp.pts.items()}}


def range_json(r):
    return None if r is ZERO_OBJECT else [r.lo, r.hi]


def _tables(d: dict) -> dict:
    return {str(k): v for k, v in d.items()}


# ---------------------------------------------------------------------------
# commands


def _pick(fx: Fixture, args, key: str, default: Optional[str] = None) -> RepComplex:
    name = getattr(args, key, None) or fx.params.get(key) or default
    if name is None:
        raise FixtureError(f"--{key} is required (or params.{key} in the fixture)")
    return fx.object(name)


def _m(fx: Fixture, args) -> int:
    if args.m is not None:
        return args.m
    return int(fx.params.get("m", 0))


def cmd_axioms(fx: Fixture, w, args) -> tuple[dict, bool]:
    samples = list(fx.objects.values()) + random_corpus(fx.poset, fx.ring, args.samples, seed=args.seed)
    for k, M in enumerate(samples):
        M.name = M.name or f"random#{k}"
    glue = verify_gluing_axioms(fx.datum(), samples)
    orth_bad = []
    for k, (X, Y) in enumerate(orthogonality_pairs(w, args.samples, seed=args.seed)):
        if not derived_hom(X, Y)[1].is_zero:
            orth_bad.append(k)
    ranges = {}
    finite = True
    for M in samples:
        try:
            ranges[M.name] = range_json(w.weight_range(M))
        except WeightError:
            ranges[M.name] = "unbounded"
            finite = False
    shift_ok = all(_shift_ok(w, M) for M in samples)
    gsum = {"passed": glue["passed"],
            "failures": [r for r in glue["samples"] if not r["passed"]]}
    rep = {"gluing_axioms": gsum, "samples": len(samples),
           "orthogonality": {"pairs": args.samples, "violations": orth_bad},
           "weight_ranges": ranges, "shift_semi_invariance": shift_ok}
    ok = glue["passed"] and not orth_bad and finite and shift_ok
    return rep, ok


def _shift_ok(w, M) -> bool:
    r = w.weight_range(M)
    r1 = w.weight_range(shift(M, 1))
    if r is ZERO_OBJECT:
        return r1 is ZERO_OBJECT
    return (r1.lo, r1.hi) == (r.lo + 1, r.hi + 1)


def cmd_decompose(fx, w, args):
    M = _pick(fx, args, "object")
    m = _m(fx, args)
    d = w.decompose(M, m)
    rep = {"object": M.name, "m": m, "B": object_json(d.B), "A": object_json(d.A),
           "certificates": d.certificates}
    return rep, d.certified


def cmd_membership(fx, w, args):
    M = _pick(fx, args, "object")
    side = args.side or fx.params.get("side", "ge0")
    m = _m(fx, args)
    verdict = w.membership(M, side, m)
    pw = pointwise_detection(M, w, m)
    return {"object": M.name, "side": side, "m": m, "member": verdict,
            "pointwise_agrees": pw["agree"]}, pw["agree"]


def cmd_glue(fx, w, args):
    rows = {}
    ok = True
    for name, M in fx.objects.items():
        pw = pointwise_detection(M, w, 0)
        rows[name] = {"range": range_json(w.weight_range(M)), "heart": w.in_heart(M),
                      "pointwise_agrees": pw["agree"]}
        ok = ok and pw["agree"]
    return {"structure": w.describe(), "strata": [list(S) for S in fx.strat.strata], "objects": rows}, ok


def cmd_t(fx, w, args):
    M = _pick(fx, args, "object")
    wc = weight_complex(M, w)
    rep = {"object": M.name, "range": range_json(w.weight_range(M)),
           "support": wc.support(),
           "terms": {str(k): object_json(T) for k, T in sorted(wc.terms.items()) if not is_contractible(T)},
           "certificates": wc.certificates}
    return rep, all(wc.certificates.values())


def cmd_ss(fx, w, args):
    M = _pick(fx, args, "object")
    N = _pick(fx, args, "target")
    sp = weight_spectral_sequence(M, N, w)
    if args.csv:
        Path(args.csv).write_text(sp.to_csv())
    rep = {"object": M.name, "target": N.name, **sp.as_json()}
    return rep, all(sp.certificates.values())


def cmd_filtration(fx, w, args):
    M = _pick(fx, args, "object")
    N = _pick(fx, args, "target")
    m = _m(fx, args)
    q = int(fx.params.get("q", 0))
    W, _ = weight_filtration(M, N, m, w, q)
    total = derived_hom(M, N)[q]
    return {"object": M.name, "target": N.name, "m": m, "q": q,
            "stage": list(W.invariant_factors), "total": list(total.invariant_factors)}, True


def cmd_k0(fx, w, args):
    classes = {}
    for name, M in fx.objects.items():
        classes[name] = euler_class(M, w)
    d = fx.datum()
    tris = []
    for name, M in fx.objects.items():
        tri = gluing_triangle(M, d, "lower")
        first, _, third = tri.objects
        tris.append((first, M, third))
    heart = [M for M in fx.objects.values() if w.in_heart(M)]
    audit = k0_audit(heart, tris, w)
    audit.pop("details", None)
    return {"classes": classes, "audit": audit}, audit["additive"]


def cmd_hom_filtration(fx, w, args):
    M = _pick(fx, args, "object")
    N = _pick(fx, args, "target")
    hf = hom_filtration(M, N, fx.strat, int(fx.params.get("q", 0)))
    return {"object": M.name, "target": N.name, **hf.as_json()}, all(hf.certificates.values())


def cmd_integral_part(fx, w, args):
    M = _pick(fx, args, "object")
    N = _pick(fx, args, "target")
    d = fx.datum()
    ip = integral_part(M, d, N, w)
    W, _ = weight_filtration(d.j_shriek(d.j_upper(M)), N, 0, w)
    same = list(ip.invariant_factors) == list(W.invariant_factors)
    return {"object": M.name, "target": N.name, "integral_part": list(ip.invariant_factors),
            "weight_filtration_W0": list(W.invariant_factors), "agree": same}, same


COMMANDS = {
    "axioms": cmd_axioms,
    "decompose": cmd_decompose,
    "membership": cmd_membership,
    "glue": cmd_glue,
    "t": cmd_t,
    "ss": cmd_ss,
    "filtration": cmd_filtration,
    "k0": cmd_k0,
    "hom-filtration": cmd_hom_filtration,
    "integral-part": cmd_integral_part,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weightglue", description="Glued weight structures on finite posets.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("fixture")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    ap.add_argument("--json", action="store_true", help="print the JSON report")
    ap.add_argument("--m", type=int, default=None)
    ap.add_argument("--object", default=None)
    ap.add_argument("--target", default=None)
    ap.add_argument("--side", default=None, choices=["ge0", "le0"])
    ap.add_argument("--csv", default=None, help="ss: write the pages as CSV to this path")
    return ap


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def execute(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        fx = load_fixture(args.fixture)
        w = build_glued_ws(fx.strat, fx.ring)
        report, ok = COMMANDS[args.command](fx, w, args)
    except NegativityFailure as e:
        err.write(f"negativity check failed: {e}\n")
        return EXIT_FAILED
    except (FixtureError, PosetError, RingError, WeightError) as e:
        err.write(f"input error: {type(e).__name__}: {e}\n")
        return EXIT_INPUT
    report = {"command": args.command, "ok": bool(ok), "report": report}
    if args.json:
        out.write(dumps(report))
    else:
        out.write(_text(report))
    return EXIT_OK if ok else EXIT_FAILED


def _text(report: dict) -> str:
    lines = [f"{report['command']}: {'ok' if report['ok'] else 'FAILED'}"]
    for k, v in report["report"].items():
        s = json.dumps(v, sort_keys=True)
        lines.append(f"  {k}: {s if len(s) < 100 else s[:97] + '...'}")
    return "\n".join(lines) + "\n"


def main() -> None:
    sys.exit(execute())


if __name__ == "__main__":
    main()
