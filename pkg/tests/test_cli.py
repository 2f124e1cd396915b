import json
import subprocess
import sys

import pytest

from borelcert import cli


def run(*args, env=None):
    return subprocess.run([sys.executable, "-m", "borelcert.cli", *args], capture_output=True,
                          text=True, env=env)


def test_certify_refutes_m2_at_six(capsys):
    assert cli.main(["certify", "--tensor", "mamu:2,2,2", "-r", "6"]) == cli.EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["conclusion"] == "border_rank_exceeds_r"
    assert cli.validate_certificate(doc) == []


def test_certify_reports_survivors(capsys):
    assert cli.main(["certify", "--tensor", "mamu:2,2,2", "-r", "7"]) == cli.EXIT_SURVIVORS


def test_certify_output_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert cli.main(["certify", "--tensor", "mamu:2,2,2", "-r", "6", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_text_format(capsys):
    cli.main(["certify", "--tensor", "mamu:2,2,2", "-r", "6", "--format", "text"])
    out = capsys.readouterr().out
    assert "conclusion: border_rank_exceeds_r" in out


@pytest.mark.parametrize("args", [
    ["certify", "--tensor", "bogus", "-r", "6"],
    ["certify", "--tensor", "mamu:2,2,2"],
    ["certify", "--tensor", "mamu:2,2,2", "-r", "6", "--degree-cap", "4"],
    ["bounds", "--family", "5nn", "--n-range", "4..6"],
    ["bounds", "--family", "2nn", "--n-range", "6..4"],
    ["bounds", "--family", "3nn", "--n-range", "4..5", "--m", "2"],
    ["frobnicate"],
])
def test_usage_errors_exit_64(args):
    assert run(*args).returncode == cli.EXIT_USAGE


def test_bounds_tsv(capsys):
    assert cli.main(["bounds", "--family", "2nn", "--n-range", "4..6", "--workers", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t") == ["n", "family", "bound", "witness-refuted-range"]
    assert [ln.split("\t")[2] for ln in lines[1:]] == ["22", "32", "44"]


def test_bounds_shift_in_m(capsys):
    cli.main(["bounds", "--family", "2nn", "--n-range", "4..4", "--m", "4", "--workers", "1"])
    row = capsys.readouterr().out.splitlines()[1].split("\t")
    assert row[:3] == ["4", "4nn", "24"]


def test_workers_env_is_validated(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.default_workers() == 3
    monkeypatch.setenv(cli.WORKERS_ENV, "zero")
    with pytest.raises(cli.UsageError):
        cli.default_workers()


def test_workers_env_gives_same_table():
    env = {**__import__("os").environ, cli.WORKERS_ENV: "2"}
    a = run("bounds", "--family", "2nn", "--n-range", "4..7", env=env)
    b = run("bounds", "--family", "2nn", "--n-range", "4..7", "--workers", "1")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_enumerate_lists_families(capsys):
    assert cli.main(["enumerate", "--tensor", "mamu:2,2,2", "-r", "6"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["families"]) == 3
    assert {f["grading"] for f in doc["families"]} == {"110"}


def test_selfcheck_single_criterion(capsys):
    assert cli.main(["selfcheck", "--only", "1"]) == 0
    assert capsys.readouterr().out.startswith("criterion  1 PASS")
