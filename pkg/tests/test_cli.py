import json
import os
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from mdx.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def fx(name):
    return str(FIXTURES / name)


def weights(doc):
    return {frozenset(entry["set"]): F(entry["weight"]) for entry in doc["decomposition"]}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", ["supermodular_example", "intervals"])
def test_decompose_matches_golden(capsys, name):
    code, out, _ = run(capsys, "decompose", fx(f"{name}.json"))
    assert code == 0
    doc = json.loads(out)
    golden = json.loads((FIXTURES / f"{name}.golden.json").read_text())
    assert doc["schema_version"] == golden["schema_version"] and doc["status"] == golden["status"]
    assert weights(doc) == weights(golden)
    assert doc["diagnostics"]["worst_slack"] is not None


def test_decompose_writes_out_file(capsys, tmp_path):
    target = tmp_path / "z.json"
    code, out, _ = run(capsys, "decompose", fx("single_path.json"), "--out", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert weights(doc) == {frozenset(): F(2, 5), frozenset({"e1"}): F(3, 10), frozenset({"e2"}): F(3, 10)}
    assert doc["ground_set"] == ["e1", "e2"]


@pytest.mark.parametrize(
    "name, expected",
    [
        ("empty_family.json", {frozenset(): F(1, 4), frozenset("a"): F(1, 2), frozenset("b"): F(1, 4)}),
        ("path_lattice.json", {frozenset(): F(1, 2), frozenset({"f1"}): F(3, 10), frozenset({"f1", "f2"}): F(1, 5)}),
    ],
)
def test_decompose_other_families(capsys, name, expected):
    code, out, _ = run(capsys, "decompose", fx(name))
    assert code == 0
    assert weights(json.loads(out)) == expected


def test_check(capsys):
    assert run(capsys, "check", fx("single_path.json"))[:2] == (0, "feasible\n")
    code, out, _ = run(capsys, "check", fx("single_path_short.json"))
    assert code == 3
    assert out.startswith("infeasible: member [")


def test_infeasible_decompose_exits_3(capsys):
    code, _, err = run(capsys, "decompose", fx("single_path_short.json"))
    assert code == 3 and err.startswith("mdx:")


def test_triangle(capsys):
    # the odd cycle has no ASC, and the explicit LP shows the marginals are out of reach
    assert run(capsys, "decompose", fx("triangle.json"))[0] == 3
    assert run(capsys, "decompose", "--mode", "balanced", fx("triangle.json"))[0] == 4


def test_input_errors_point_at_the_line(capsys):
    code, _, err = run(capsys, "decompose", fx("pi_too_large.json"))
    assert code == 2
    assert "pi_too_large.json:5: $.requirements.entries[0].value" in err
    code, _, err = run(capsys, "check", fx("bad_syntax.json"))
    assert code == 2 and "line" in err and "column" in err
    assert run(capsys, "decompose", fx("missing.json"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_cap_flag_and_environment(capsys, monkeypatch):
    monkeypatch.setenv("MDX_CAP", "1")
    assert run(capsys, "decompose", fx("supermodular_example.json"))[0] == 4
    assert run(capsys, "decompose", "--cap", "12", fx("supermodular_example.json"))[0] == 0
    monkeypatch.setenv("MDX_CAP", "many")
    assert run(capsys, "decompose", fx("supermodular_example.json"))[0] == 2


def test_sample_is_seeded(capsys, tmp_path):
    result = tmp_path / "z.json"
    assert main(["decompose", fx("supermodular_example.json"), "--out", str(result)]) == 0
    code, first, _ = run(capsys, "sample", str(result), "--n", "20", "--seed", "7")
    assert code == 0
    lines = first.splitlines()
    assert len(lines) == 20 and all(json.loads(line) in ([], ["a"], ["b"]) for line in lines)
    assert run(capsys, "sample", str(result), "--n", "20", "--seed", "7")[1] == first
    assert run(capsys, "sample", str(result), "--n", "0")[1] == ""
    assert run(capsys, "sample", str(result), "--n", "-1")[0] == 2


def test_sample_rejects_unnormalized_results(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "status": "ok", "decomposition": [{"set": [], "weight": "1/2"}]}))
    assert run(capsys, "sample", str(bad))[0] == 2


def test_app_security(capsys):
    code, out, _ = run(capsys, "app", "security", fx("security_single.json"))
    assert code == 0 and F(json.loads(out)["app"]["cost"]) == 1
    code, out, _ = run(capsys, "app", "security", fx("smuggling_star.json"))
    assert code == 0 and F(json.loads(out)["app"]["cost"]) == F(9, 16)
    code, out, _ = run(capsys, "app", "security", fx("path_lattice.json"))
    assert code == 0 and F(json.loads(out)["app"]["cost"]) == F(7, 10)


def test_app_coverage(capsys):
    code, out, _ = run(capsys, "app", "coverage", fx("coverage_single.json"))
    assert code == 0 and F(json.loads(out)["app"]["t"]) == 1


def test_app_committee(capsys):
    code, out, _ = run(capsys, "app", "committee", fx("committee_free.json"))
    assert code == 0
    assert weights(json.loads(out)) == {frozenset("a"): F(1, 2), frozenset("b"): F(1, 2)}
    code, out, _ = run(capsys, "app", "committee", fx("committee_groups.json"), "--n", "5", "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert all(len(entry["set"]) == 2 for entry in doc["decomposition"])
    assert len(doc["app"]["sampler"]["draws"]) == 5


def test_app_rejects_the_wrong_family(capsys):
    assert run(capsys, "app", "coverage", fx("intervals.json"))[0] == 2


def test_module_entry_point():
    env = dict(os.environ)
    env.pop("MDX_CAP", None)
    proc = subprocess.run(
        [sys.executable, "-m", "mdx", "check", fx("single_path.json")], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0 and proc.stdout == "feasible\n"
