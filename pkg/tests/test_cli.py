import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from conftest import FIXTURES, MINI_FACTS
from kgengine.cli import main
from kgengine.loader import load_file
from kgengine.service import create_app, load_graph_dir

MINI = str(FIXTURES / "f1040_mini.kg.xml")
BENEFIT = str(FIXTURES / "benefit_eligibility.kg.xml")
FACTS = str(FIXTURES / "f1040_mini.facts")
CORPUS = FIXTURES / "corpus"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_ok(capsys):
    code, out, err = run(capsys, "validate", MINI)
    assert code == 0
    assert out.strip() == "OK"
    assert err == ""


def test_validate_cyclic_file(capsys, tmp_path):
    doc = """<knowledge-graph>
  <fields>
    <field id="p" kind="money" role="computed"/>
    <field id="q" kind="money" role="computed"/>
  </fields>
  <calcs>
    <calc id="m1" gist="ADD" out="p"><in ref="q"/></calc>
    <calc id="m2" gist="ADD" out="q"><in ref="p"/></calc>
  </calcs>
</knowledge-graph>"""
    target = tmp_path / "cyc.kg.xml"
    target.write_text(doc, encoding="utf-8")
    code, out, err = run(capsys, "validate", str(target))
    assert code == 1
    assert "KG018" in err and "p" in err and "q" in err


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/does/not/exist.kg.xml")
    assert code == 2
    assert "cannot read" in err


def test_eval_prints_sorted_table(capsys):
    code, out, _ = run(capsys, "eval", MINI, "--facts", FACTS)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines == [
        "L16 = 400.00",
        "L17 = 500.00",
        "L18a = 100.00",
        "L18b = 0.00",
        "L18c = 0.00",
        "L18d = 0.00",
        "L18e = 100.00",
        "L19 = 600.00",
        "L20 = 200.00",
    ]


def test_eval_empty_facts_everything_unknown(capsys, tmp_path):
    empty = tmp_path / "empty.facts"
    empty.write_text("# nothing\n", encoding="utf-8")
    code, out, _ = run(capsys, "eval", MINI, "--facts", str(empty))
    assert code == 0
    for line in out.strip().splitlines():
        assert line.endswith("= unknown")


def test_eval_with_explain_tree(capsys):
    code, out, _ = run(capsys, "eval", MINI, "--facts", FACTS, "--explain", "L20", "--depth", "2")
    assert code == 0
    assert "L20 (200.00) is L19 (600.00) minus L16 (400.00), floored at zero" in out
    assert "\n  L19 (600.00) is the sum of L17 (500.00), L18e (100.00)" in out
    assert "\n    L17 (500.00) is a value you entered" in out


def test_eval_bad_fact_diagnosed(capsys, tmp_path):
    facts = tmp_path / "bad.facts"
    facts.write_text("L17=oops\nL16=400.00\n", encoding="utf-8")
    code, out, err = run(capsys, "eval", MINI, "--facts", str(facts))
    assert code == 1
    assert "bad.facts:1" in err
    assert "L16 = 400.00" in out  # good facts still applied


def test_missing_decided(capsys, tmp_path):
    facts = tmp_path / "age.facts"
    facts.write_text("Age=17\n", encoding="utf-8")
    code, out, _ = run(capsys, "missing", BENEFIT, "--facts", str(facts))
    assert code == 0
    assert out.strip() == "graph benefit: decided: Disqualified"


def test_missing_asks_next_question(capsys, tmp_path):
    facts = tmp_path / "none.facts"
    facts.write_text("", encoding="utf-8")
    code, out, _ = run(capsys, "missing", BENEFIT, "--facts", str(facts))
    assert code == 0
    assert out.strip() == "graph benefit: next question: Age (relevant: Age, Residence)"


def test_missing_empty_when_complete(capsys):
    code, out, _ = run(capsys, "missing", MINI, "--facts", FACTS)
    assert code == 0
    assert out == ""


def test_compile_writes_fragment_and_report(capsys, tmp_path):
    fragment = tmp_path / "frag.kg.xml"
    report = tmp_path / "report.json"
    code, out, _ = run(
        capsys, "compile", str(CORPUS / "synthetic50.tsv"),
        "--fields", str(CORPUS / "synthetic50_fields.kg.xml"),
        "-o", str(fragment), "--report", str(report),
        "--graph-id", "synth_compiled",
    )
    assert code == 0
    assert "matched 40 of 50 calculation lines; automation rate 0.80" in out

    loaded = load_file(fragment)
    assert loaded.ok
    assert len(loaded.graph.calc_models) == 40

    machine = json.loads(report.read_text(encoding="utf-8"))
    assert machine["automation_rate"] == "0.80"
    assert machine["calculation_lines"] == 50
    assert len(machine["matched"]) == 40


def test_compile_bad_corpus_is_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("no tabs here\n", encoding="utf-8")
    code, _, err = run(
        capsys, "compile", str(bad), "--fields", str(CORPUS / "synthetic50_fields.kg.xml"),
    )
    assert code == 2
    assert "expected form<TAB>line<TAB>text" in err


def test_cli_output_is_deterministic(capsys):
    _, first, _ = run(capsys, "eval", MINI, "--facts", FACTS, "--explain", "L20", "--depth", "3")
    _, second, _ = run(capsys, "eval", MINI, "--facts", FACTS, "--explain", "L20", "--depth", "3")
    assert first == second


def test_cli_eval_matches_service(capsys):
    _, out, _ = run(capsys, "eval", MINI, "--facts", FACTS)
    cli_values = dict(line.split(" = ") for line in out.strip().splitlines())

    client = TestClient(create_app(load_graph_dir(FIXTURES)))
    sid = client.post("/v1/sessions", json={"graph": "f1040_mini"}).json()["session_id"]
    changed = client.patch(f"/v1/sessions/{sid}/facts", json={"set": MINI_FACTS}).json()["changed"]
    for fid, value in changed.items():
        assert cli_values[fid] == value
