import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from weightglue.cli import Fixture, FixtureError, complex_json, execute
from weightglue.sampling import random_corpus

from golden_cases import CASES

ROOT = Path(__file__).resolve().parent.parent


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def _cwd(monkeypatch):
    monkeypatch.chdir(ROOT)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, out, _ = run(CASES[name] + ["--json"])
    assert code == 0
    assert out == (ROOT / "tests" / "goldens" / f"{name}.json").read_text()


def test_deterministic_across_processes():
    argv = [sys.executable, "-m", "weightglue.cli"] + CASES["s2_ss"] + ["--json"]
    a = subprocess.run(argv, capture_output=True, text=True, cwd=ROOT)
    b = subprocess.run(argv, capture_output=True, text=True, cwd=ROOT)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_decompose_mix_report():
    code, out, _ = run(["decompose", "fixtures/s2.json", "--object", "MIX", "--m", "0", "--json"])
    rep = json.loads(out)["report"]
    assert code == 0 and all(rep["certificates"].values())
    assert rep["A"]["cohomology"] == {"-1": {"u": [0], "z": [0]}}


def test_not_down_set_exit_code():
    code, _, err = run(["axioms", "fixtures/bad_closed.json"])
    assert code == 2 and "NotDownSet" in err


def test_malformed_fixture(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["glue", str(p)])[0] == 2
    p.write_text(json.dumps({"ring": "Z", "poset": {"elements": ["a"]},
                             "objects": {"X": {"complex": {"terms": {"0": {"ranks": {"a": 1}}},
                                                           "diffs": {"0": {"a": {"shape": [1, 1], "data": [1]}}}}}}}))
    code, _, err = run(["glue", str(p)])
    assert code == 2 and "differential" in err
    p.write_text(json.dumps({"ring": "Z/0x", "poset": {"elements": ["a"]}}))
    assert run(["glue", str(p)])[0] == 2
    p.write_text(json.dumps({"poset": {"elements": ["a", "b"], "covers": [["a", "b"]]},
                             "stratification": [["a"], ["b"]]}))
    assert run(["glue", str(p)])[0] == 2


def test_failed_check_exit_code(tmp_path):
    data = json.loads((ROOT / "fixtures" / "s2.json").read_text())
    data["hearts"] = [[{"constant": {}}, {"constant": {"degree": 1}}], [{"constant": {}}]]
    p = tmp_path / "neg.json"
    p.write_text(json.dumps(data))
    code, _, err = run(["glue", str(p)])
    assert code == 1 and "negativity" in err


def test_csv_dump(tmp_path):
    p = tmp_path / "pages.csv"
    code, _, _ = run(["ss", "fixtures/s2.json", "--object", "MIX", "--target", "CONST", "--csv", str(p)])
    assert code == 0 and p.read_text().startswith("r,p,q,invariant_factors")


def test_text_output():
    code, out, _ = run(["membership", "fixtures/s2.json", "--object", "CONST", "--side", "ge0"])
    assert code == 0 and out.startswith("membership: ok")


def test_fixture_roundtrip():
    fx = Fixture(json.loads((ROOT / "fixtures" / "chain3.json").read_text()))
    objs = {f"M{k}": complex_json(M) for k, M in enumerate(random_corpus(fx.poset, fx.ring, 10, seed=3))}
    data = {"ring": "Z", "poset": {"elements": list(fx.poset.elements), "covers": [list(c) for c in fx.poset.covers]},
            "objects": objs}
    fx2 = Fixture(json.loads(json.dumps(data)))
    for k, M in enumerate(random_corpus(fx.poset, fx.ring, 10, seed=3)):
        assert fx2.object(f"M{k}").equals(M)
    with pytest.raises(FixtureError):
        fx2.object("nope")
