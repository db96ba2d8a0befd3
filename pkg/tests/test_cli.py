import io
import json
import math
import shutil
import subprocess
import sys

import jsonschema
import pytest

from conezeta.cli import OUTPUT_SCHEMAS, run

QUADRANT = '{"ambient_dim":2,"open":false,"generators":[[1,0],[0,1]]}'
CHEN21 = '{"ambient_dim":2,"open":true,"generators":[[1,0],[1,1]]}'
PAIR22 = '{"matrix":[[1,1],[0,1]],"s":[2,2]}'
RELATION = ["relation", "--pair", PAIR22, "--open-split", "[[2,1]]", "--closed-split", "[[1,2]]"]


def ok(argv):
    code, out, err = run(argv)
    assert code == 0, err
    assert out.endswith("\n")
    obj = json.loads(out)
    jsonschema.validate(obj, OUTPUT_SCHEMAS[argv[0]])
    return obj


# ---------------------------------------------------------------- examples

def test_phi_example():
    assert ok(["phi", "--cone", QUADRANT]) == [
        {"coeff": "1/1", "poles": [{"form": [0, 1], "mult": 1}, {"form": [1, 0], "mult": 1}]}]


def test_relation_example():
    obj = ok(RELATION)
    assert obj["mzv_form"] == [{"coeff": "1/1", "index": [4]}, {"coeff": "-4/1", "index": [3, 1]}]
    assert {(t["coeff"], tuple(t["s"])) for t in obj["terms"]} == {("1/1", (2, 2)), ("-2/1", (3, 1))}
    assert len(obj["terms"]) == 3


def test_eval_example():
    obj = ok(["eval", "--type", "open", "--cone", CHEN21, "--s", "[2,1]", "--depth", "1000"])
    assert abs(obj["value"] - 1.20206) < 1e-5
    assert obj["certified"] and obj["N"] == 1000


# ---------------------------------------------------------------- every verb

def test_other_verbs():
    sub = ok(["subdivide", "--cone", '{"ambient_dim":2,"open":false,"generators":[[1,0],[1,2]]}'])
    assert len(sub["pieces"]) == 2
    ok(["subdivide", "--cone", QUADRANT, "--method", "open"])
    frac = '[{"coeff":"1/1","poles":[{"form":[1,0],"mult":1},{"form":[0,1],"mult":1},{"form":[1,1],"mult":1}]}]'
    assert len(ok(["decompose", "--fraction", frac])) == 2
    assert len(ok(["decompose", "--fraction", frac, "--positive"])) == 2
    ok(["derive", "--fraction", frac, "--index", "0"])
    ok(["derive", "--decorated", '{"ambient_dim":2,"generators":[[1,0],[0,1]],"exponents":[1,1]}', "--index", "0"])
    lzv = ok(["eval", "--type", "lzv", "--decorated",
              '{"ambient_dim":2,"generators":[[1,0],[0,1]],"exponents":[2,2]}', "--depth", "2000"])
    assert abs(lzv["value"] - (math.pi ** 2 / 6) ** 2) < 1e-8
    assert abs(ok(["eval", "--type", "mzv", "--s", "[3,1]", "--depth", "2000"])["value"] - math.pi ** 4 / 360) < 1e-9
    ok(["eval", "--type", "shintani", "--matrix", "[[1,1],[0,1]]", "--s", "[2,1]"])
    pair = ok(["pair", "--decorated", '{"ambient_dim":2,"generators":[[1,0],[1,1]],"exponents":[2,1]}'])
    assert pair["closed_side"] == {"ambient_dim": 2, "generators": [[1, 0], [1, 1]], "exponents": [2, 1]}
    ok(["pair", "--pair", PAIR22])


def test_verify_and_relation_round_trip(tmp_path):
    rel = ok(RELATION)
    path = tmp_path / "rel.json"
    path.write_text(json.dumps(rel))
    v = ok(["verify", "--relation", "@" + str(path), "--depth", "2000"])
    assert v == {"verified": True, "N": 2000, "tol": 1e-6, "mzv_verified": True}


def test_stdin_input(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(QUADRANT))
    assert ok(["phi", "--cone", "-"]) == ok(["phi", "--cone", QUADRANT])


# ---------------------------------------------------------------- exit codes

@pytest.mark.parametrize("argv", [
    ["phi", "--cone", '{"ambient_dim":2}'],
    ["phi", "--cone", "not json"],
    ["phi", "--cone", QUADRANT, "--bogus"],
    ["frobnicate"],
    ["phi"],
])
def test_schema_errors_exit_2(argv):
    assert run(argv)[0] == 2


def test_precondition_errors_exit_3():
    code, out, err = run(["pair", "--pair", '{"matrix":[[2,1],[0,1]],"s":[2,2]}'])
    assert code == 3 and not out and err.startswith("conezeta:")
    divergent = {"terms": [{"coeff": "1/1", "s": [1, 1], "cone": json.loads(QUADRANT) | {"open": True}}]}
    assert run(["verify", "--relation", json.dumps(divergent)])[0] == 3


def test_verification_failure_exit_4():
    rel = ok(RELATION)
    rel["terms"][0]["coeff"] = "-6/1"
    code, out, _ = run(["verify", "--relation", json.dumps(rel), "--depth", "2000"])
    assert code == 4
    assert json.loads(out)["verified"] is False


# ---------------------------------------------------------------- determinism and formatting

def test_byte_stable_output():
    argv = RELATION + ["--depth", "500"]
    assert run(argv) == run(argv)
    e = ["eval", "--type", "open", "--cone", CHEN21, "--s", "[2,1]", "--depth", "700"]
    assert run(e) == run(e)


def test_pretty_format():
    code, out, _ = run(["phi", "--cone", QUADRANT, "--format", "pretty"])
    assert code == 0 and "\n  " in out
    assert json.loads(out) == ok(["phi", "--cone", QUADRANT])


@pytest.mark.skipif(shutil.which("conezeta") is None, reason="entry point not installed")
def test_console_script():
    p = subprocess.run(["conezeta", "phi", "--cone", QUADRANT], capture_output=True, text=True)
    assert p.returncode == 0
    assert p.stdout == run(["phi", "--cone", QUADRANT])[1]
