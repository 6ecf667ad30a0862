import subprocess
import sys

import pytest

from bioquery import defaults
from bioquery.cli import main

from conftest import SAMPLE_EXPLANATION, SAMPLE_QUERY


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ask_prints_answers_only(capsys):
    code, out, err = run_cli(capsys, "ask", SAMPLE_QUERY)
    assert code == 0
    assert out.splitlines() == ["ADRB1"]


def test_ask_with_explain_and_program(capsys):
    code, out, _ = run_cli(capsys, "ask", SAMPLE_QUERY, "--explain", "--program")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("what_be_genes(GN1) :- ")
    assert lines[1] == "ADRB1"
    assert lines[2] == SAMPLE_EXPLANATION


def test_ask_grammar_error_exit_code(capsys):
    code, out, err = run_cli(capsys, "ask", "What are the genes that?")
    assert code == 1
    assert out == ""
    assert "grammar_error" in err
    assert "expected:" in err


def test_ask_multiple_answers_sorted(capsys):
    code, out, _ = run_cli(
        capsys, "ask",
        "What are the drugs that target the genes that interact with the "
        "gene DLG4?")
    assert code == 0
    assert out.splitlines() == ["Epinephrine", "Propranolol"]


def test_validate_rules_ok(capsys, tmp_path):
    path = tmp_path / "rules.lp"
    path.write_text("p(X,Y) :- q(X,Y).\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "validate-rules", str(path))
    assert code == 0
    assert out.startswith("OK: 1 rules")


def test_validate_rules_reports_unsafe(capsys, tmp_path):
    path = tmp_path / "rules.lp"
    path.write_text("p(X,Y) :- q(X).\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "validate-rules", str(path))
    assert code == 1
    assert "Y" in err


def test_load_reports_counts(capsys, tmp_path):
    facts = tmp_path / "facts.tsv"
    facts.write_text("ctd_drug_gene\tEpinephrine\tADRB1\tCTD\n"
                     "ctd_drug_gene\tEpinephrine\tADRB1\tCTD\n",
                     encoding="utf-8")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("facts.tsv\tCTD\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "load", "--manifest", str(manifest))
    assert code == 0
    assert "CTD\tadded=1\tduplicates=1\terrors=0" in out
    assert "total\t1" in out


def test_load_bad_rows_exit_code(capsys, tmp_path):
    facts = tmp_path / "facts.tsv"
    facts.write_text("too\tfew\n", encoding="utf-8")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("facts.tsv\tCTD\n", encoding="utf-8")
    code, _, err = run_cli(capsys, "load", "--manifest", str(manifest))
    assert code == 1
    assert "wrong column count" in err


def test_custom_rules_flag_wins_over_env(capsys, tmp_path, monkeypatch):
    env_rules = tmp_path / "env_rules.lp"
    env_rules.write_text("p(X,Y) :- ctd_drug_gene(X,Y).\n", encoding="utf-8")
    monkeypatch.setenv("BQ_RULES", str(env_rules))
    flag_rules = tmp_path / "flag_rules.lp"
    flag_rules.write_text(defaults.default_rules_text(), encoding="utf-8")
    code, out, err = run_cli(capsys, "ask", SAMPLE_QUERY,
                             "--rules", str(flag_rules))
    assert code == 0
    assert out.splitlines() == ["ADRB1"]
    # with only the env rules the query's predicates are undefined
    code, out, err = run_cli(capsys, "ask", SAMPLE_QUERY)
    assert code == 0
    assert out == ""
    assert "warning" in err


def test_console_script_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "bioquery.cli", "ask", SAMPLE_QUERY],
        capture_output=True, text=True, timeout=120)
    assert result.returncode == 0
    assert result.stdout.splitlines() == ["ADRB1"]
