import io
import json

import pytest

from sprego.cli import main


@pytest.fixture
def csv_path(tmp_path):
    p = tmp_path / "data.csv"
    p.write_text("age,name\n3,ann\n7,bo\n9,cy\n", encoding="utf-8")
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def test_parse_prints_canonical(capsys):
    code, out, _ = run(capsys, "parse", "--formula", "= sum( a1 : a3 )")
    assert code == 0
    assert out.strip() == "=SUM(A1:A3)"


def test_parse_json(capsys):
    code, out, _ = run(capsys, "parse", "--formula", "{=SUM(xs)}", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == 1
    assert doc["array_entered"] is True
    assert doc["ast"]["type"] == "call"


def test_parse_error_exit_2(capsys):
    code, _, err = run(capsys, "parse", "--formula", "=1..2")
    assert code == 2
    assert "error" in err


def test_usage_error_exit_2(capsys):
    assert main(["parse"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def test_eval_array_aggregate(capsys, csv_path):
    code, out, _ = run(capsys, "eval", "--table", csv_path, "--formula", "{=SUM(IF(age>5,1,0))}")
    assert code == 0
    assert out.strip() == "2"


def test_eval_vector_output(capsys, csv_path):
    code, out, _ = run(capsys, "eval", "--table", csv_path, "--formula", "{=age*2}")
    assert out.splitlines() == ["6", "14", "18"]


def test_eval_scalar_row(capsys, csv_path):
    code, out, _ = run(capsys, "eval", "--table", csv_path, "--formula", "=LEN(name)", "--row", "2")
    assert out.strip() == "2"


def test_eval_json_result(capsys, csv_path):
    _, out, _ = run(capsys, "eval", "--table", csv_path, "--formula", "=1/0", "--format", "json")
    doc = json.loads(out)
    assert doc["result"] == {"error": "#DIV/0!"}


def test_eval_no_table(capsys):
    code, out, _ = run(capsys, "eval", "--formula", "=2+3")
    assert code == 0
    assert out.strip() == "5"


def test_eval_formula_file(capsys, csv_path, tmp_path):
    f = tmp_path / "f.txt"
    f.write_text("=SUM(age)\n", encoding="utf-8")
    _, out, _ = run(capsys, "eval", "--table", csv_path, "--formula-file", str(f))
    assert out.strip() == "19"


# ---------------------------------------------------------------------------
# lint / rewrite
# ---------------------------------------------------------------------------


def test_lint_findings_exit_1(capsys):
    code, out, _ = run(capsys, "lint", "--formula", '=COUNTIF(A1:A9,">5")')
    assert code == 1
    assert "NON_SPREGO_FUNCTION" in out


def test_lint_clean_exit_0(capsys):
    code, out, _ = run(capsys, "lint", "--formula", "{=SUM(IF(A1:A9>5,1,0))}")
    assert code == 0
    assert "clean" in out


def test_lint_json(capsys):
    _, out, _ = run(capsys, "lint", "--formula", "=SUM($A$1:$A$9)", "--format", "json")
    doc = json.loads(out)
    assert len(doc["diagnostics"]) == 2


def test_rewrite_prints_replacement(capsys):
    code, out, _ = run(capsys, "rewrite", "--formula", '=COUNTIF(A1:A9,">5")')
    assert code == 0
    assert out.strip() == "{=SUM(IF(A1:A9>5,1,0))}"


def test_rewrite_json_plans(capsys):
    _, out, _ = run(capsys, "rewrite", "--formula", "=IFERROR(A1/B1,0)", "--format", "json")
    doc = json.loads(out)
    assert doc["rewritten"] == "=IF(ISERROR(A1/B1),0,A1/B1)"
    assert doc["plans"][0]["rule"] == "R7"
    assert doc["unrewritten_calls"] == []


def test_rewrite_leftover_exit_1(capsys):
    code, out, _ = run(capsys, "rewrite", "--formula", '=COUNTIF(A1:A9,"a*")')
    assert code == 1
    assert out.strip() == '=COUNTIF(A1:A9,"a*")'


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_pair_passes(capsys):
    code, out, _ = run(
        capsys, "check",
        "--original", '=COUNTIF(xs,">5")',
        "--rewritten", "{=SUM(IF(xs>5,1,0))}",
        "--trials", "10", "--seed", "3",
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] is True
    assert doc["seed"] == 3


def test_check_pair_failure_exit_1(capsys):
    code, out, _ = run(
        capsys, "check",
        "--original", '=COUNTIF(xs,">5")',
        "--rewritten", "{=SUM(IF(xs>5,1,1))}",
        "--trials", "10",
    )
    doc = json.loads(out)
    assert code == 1
    assert doc["passed"] is False
    assert doc["verdicts"][0]["failures"]


def test_check_all_rules_quick(capsys):
    code, out, _ = run(capsys, "check", "--all-rules", "--trials", "5", "--seed", "7")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] is True
    assert {v["rule"] for v in doc["verdicts"]} == {f"R{i}" for i in range(1, 9)}


def test_check_byte_identical_runs(capsys):
    _, first, _ = run(capsys, "check", "--all-rules", "--trials", "4", "--seed", "7")
    _, second, _ = run(capsys, "check", "--all-rules", "--trials", "4", "--seed", "7")
    assert first == second


def test_check_missing_rewritten(capsys):
    code, _, err = run(capsys, "check", "--original", "=SUM(xs)")
    assert code == 2


# ---------------------------------------------------------------------------
# report / profile
# ---------------------------------------------------------------------------


def test_report_text(capsys, csv_path):
    code, out, _ = run(
        capsys, "report", "--table", csv_path,
        "--formula", "=A1+B1",
        "--formula", "{=SUM(IF(age>5,1,0))}",
    )
    assert code == 0
    assert "workbook level: GU" in out


def test_report_json(capsys):
    _, out, _ = run(capsys, "report", "--formula", "=A1+B1", "--format", "json")
    doc = json.loads(out)
    assert doc["workbook"]["level"] == "BU"
    assert doc["formulas"][0]["level"] == "BU"
    assert len(doc["not_assessed"]) == 26


def test_report_formulas_file(capsys, tmp_path):
    f = tmp_path / "formulas.txt"
    f.write_text("=1+1\n\n{=SUM(IF(A1:A3>1,1,0))}\n", encoding="utf-8")
    _, out, _ = run(capsys, "report", "--formulas-file", str(f))
    assert "workbook level: GU" in out


def test_profile_text(capsys, csv_path):
    code, out, _ = run(capsys, "profile", "--table", csv_path)
    assert code == 0
    assert "age: dominant=number" in out
    assert "min=3 max=9" in out


def test_profile_json(capsys, csv_path):
    _, out, _ = run(capsys, "profile", "--table", csv_path, "--format", "json")
    doc = json.loads(out)
    assert doc["columns"][0]["counts"]["number"] == 3
    # the table itself serializes as {name, headers, rows}
    assert doc["table"]["headers"] == ["age", "name"]
    assert doc["table"]["rows"][0] == [3.0, "ann"]


# ---------------------------------------------------------------------------
# repl
# ---------------------------------------------------------------------------


def repl(monkeypatch, capsys, script, *argv):
    monkeypatch.setattr("sys.stdin", io.StringIO(script))
    code = main(["repl", *argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_repl_eval_and_quit(monkeypatch, capsys, csv_path):
    code, out, err = repl(monkeypatch, capsys, "=SUM(age)\n:quit\n", "--table", csv_path)
    assert code == 0
    assert out.splitlines()[0] == "19"
    assert "level: BU" in err


def test_repl_row_mode(monkeypatch, capsys, csv_path):
    code, out, _ = repl(monkeypatch, capsys, ":row 2\n=LEN(name)\n", "--table", csv_path)
    assert out.splitlines()[0] == "2"


def test_repl_load_and_diagnostics(monkeypatch, capsys, csv_path):
    script = f":load {csv_path}\n=COUNTIF(age,\">5\")\n"
    code, out, err = repl(monkeypatch, capsys, script)
    assert out.splitlines()[0] == "2"
    assert "NON_SPREGO_FUNCTION" in err


def test_repl_parse_error_keeps_going(monkeypatch, capsys, csv_path):
    code, out, err = repl(monkeypatch, capsys, "=1..2\n=2+2\n", "--table", csv_path)
    assert code == 0
    assert "error" in err
    assert out.splitlines()[0] == "4"


# ---------------------------------------------------------------------------
# seed fallback
# ---------------------------------------------------------------------------


def test_env_seed_fallback(monkeypatch, capsys):
    monkeypatch.setenv("SPREGO_SEED", "99")
    _, out_env, _ = run(capsys, "eval", "--formula", "=RAND()")
    monkeypatch.delenv("SPREGO_SEED")
    _, out_default, _ = run(capsys, "eval", "--formula", "=RAND()")
    _, out_explicit, _ = run(capsys, "eval", "--formula", "=RAND()", "--seed", "99")
    assert out_env == out_explicit
    assert out_env != out_default


def test_identical_invocations_identical_bytes(capsys, csv_path):
    args = ("eval", "--table", csv_path, "--formula", "{=SUM(IF(age>RAND()*9,1,0))}", "--seed", "5")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
