import csv
import json

import pytest

from hamgeom.cli import SERIES_HEADER, main, parse_grid
from hamgeom.geometry import CutReport


def run(*argv):
    return main([str(a) for a in argv])


def test_analyze_writes_outputs(tmp_path):
    out = tmp_path / "a"
    assert run("analyze", "--model", "tim:n=3,gamma=0.5,alpha=1.0,ring=true", "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["all_checks_pass"]
    assert summary["exhaustive"]["subsets"] == 254
    with (out / "cuts.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CutReport.CSV_HEADER
    assert sum(r[0].startswith("code:") for r in rows[1:]) == 254
    assert json.loads((out / "config.json").read_text())["command"] == "analyze"


def test_analyze_is_byte_identical(tmp_path):
    ref = "random2local:n=3,seed=2"
    assert run("analyze", "--model", ref, "--out", tmp_path / "x") == 0
    assert run("analyze", "--model", ref, "--out", tmp_path / "y") == 0
    assert (tmp_path / "x" / "cuts.csv").read_bytes() == (tmp_path / "y" / "cuts.csv").read_bytes()


def test_config_rerun_reproduces(tmp_path):
    out = tmp_path / "c"
    assert run("search-cuts", "--model", "ghz:n=4,gamma=0.3", "--out", out) == 0
    first = (out / "cuts.csv").read_bytes()
    (out / "cuts.csv").unlink()
    assert run("--config", out / "config.json") == 0
    assert (out / "cuts.csv").read_bytes() == first


def test_spec_file_input(tmp_path):
    spec = {"sites": [2, 2], "labels": "bits",
            "terms": [{"pauli": "X", "sites": [0], "coeff": -1.0}, {"pauli": "X", "sites": [1], "coeff": -0.5},
                      {"pauli": "ZZ", "sites": [0, 1], "coeff": 0.3}]}
    path = tmp_path / "h.json"
    path.write_text(json.dumps(spec))
    assert run("analyze", "--spec-file", path, "--out", tmp_path / "o") == 0


@pytest.mark.parametrize(
    "argv,code",
    [
        (["analyze", "--model", "nope:n=3"], 2),
        (["analyze", "--model", "tim:n=zz"], 2),
        (["analyze"], 2),
        (["analyze", "--model", "tim:n=3", "--spec-file", "x.json"], 2),
        (["analyze", "--spec-file", "missing.json"], 2),
        (["search-cuts", "--model", "tim:n=6", "--strategy", "clock-window"], 0),
        (["analyze", "--model", "tim:n=3,gamma=0,alpha=1"], 4),
        (["analyze", "--model", "ghz:n=4,gamma=0"], 4),
        (["analyze", "--model", "ring:n=3,perturbed=false"], 0),
        (["analyze", "--model", "blocktoy"], 0),
    ],
)
def test_exit_codes(argv, code, tmp_path):
    assert run(*argv, "--out", tmp_path / "o") == code


def test_degenerate_without_hint_is_check_failure(tmp_path):
    spec = {"sites": [2, 2], "labels": "bits", "terms": [{"pauli": "XI", "sites": [0, 1], "coeff": -1.0}]}
    path = tmp_path / "deg.json"
    path.write_text(json.dumps(spec))
    assert run("analyze", "--spec-file", path, "--out", tmp_path / "o") == 1


def test_bad_spec_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"sites": [2], "terms": [{"pauli": "Q"}]}')
    assert run("analyze", "--spec-file", path, "--out", tmp_path / "o") == 2
    path.write_text("{not json")
    assert run("analyze", "--spec-file", path, "--out", tmp_path / "o") == 2


def test_parse_grid():
    assert parse_grid(["n=3:6"]) == [("n", [3, 4, 5, 6])]
    assert parse_grid(["gamma=0.5,1"]) == [("gamma", ["0.5", "1"])]


def test_sweep_series_and_in_row_errors(tmp_path):
    out = tmp_path / "s"
    assert run("sweep", "--model", "ghz:gamma=0.3", "--grid", "n=3,1,4", "--out", out) == 0
    with (out / "series.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(SERIES_HEADER)
    assert [r["params"] for r in rows] == ["n=3", "n=1", "n=4"]
    assert rows[0]["error"] == "" and rows[2]["error"] == ""
    assert rows[1]["error"].startswith("HamiltonianError")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["failed_points"] == 1


def test_sweep_workers_do_not_change_output(tmp_path):
    args = ["sweep", "--model", "tim:gamma=0.5,alpha=1.0", "--grid", "n=3:5"]
    assert run(*args, "--out", tmp_path / "one") == 0
    assert run(*args, "--workers", 2, "--out", tmp_path / "two") == 0
    assert (tmp_path / "one" / "series.csv").read_bytes() == (tmp_path / "two" / "series.csv").read_bytes()


def test_sweep_requires_valid_base(tmp_path):
    assert run("sweep", "--model", "tim:n=3", "--out", tmp_path) == 2
    assert run("sweep", "--model", "nope", "--grid", "n=3", "--out", tmp_path) == 2


def test_verify_and_report(tmp_path, capsys):
    out = tmp_path / "v"
    code = run("verify", "--only", "1", "--out", out)
    data = json.loads((out / "verify.json").read_text())
    assert [c["criterion"] for c in data["criteria"]] == [1]
    assert code == (0 if data["passed"] else 1)
    capsys.readouterr()
    assert run("report", "--out", out) == 0
    assert "criterion" not in capsys.readouterr().err


def test_report_without_outputs(tmp_path):
    assert run("report", "--out", tmp_path / "empty") == 2
