import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sphdefect.cli import COLUMNS, main

C3 = 0.36755259694786136634

GOLDEN_COLUMNS = {
    "constants": ["quantity", "value", "error"],
    "moments": ["l", "j", "value", "error", "scaled", "scaled_error", "limit", "limit_error"],
    "variance": ["l", "il", "il_error", "variance", "variance_error", "scaled", "scaled_error", "deviation"],
    "mc": [
        "l", "n_samples", "seed", "resolution", "mean", "mean_stderr", "variance",
        "var_stderr", "exact_variance", "exact_error",
    ],
    "cg-check": ["l", "moment", "moment_error", "cg_value", "abs_diff"],
    "hilb-check": ["l", "near_ratio", "far_ratio", "k_fit", "holds"],
    "report": ["l", "variance", "variance_error", "scaled", "scaled_error", "deviation"],
}
GOLDEN_KEYS = ["schemaVersion", "command", "config", "results", "summary", "checks", "ok"]


def run_json(capsys, *argv):
    status = main(list(argv))
    return status, json.loads(capsys.readouterr().out)


def test_columns_frozen():
    assert COLUMNS == GOLDEN_COLUMNS


def test_constants_json(capsys):
    status, doc = run_json(capsys, "constants")
    assert status == 0
    assert list(doc) == GOLDEN_KEYS
    assert doc["schemaVersion"] == 1
    values = {r["quantity"]: r for r in doc["results"]}
    for name in ("C", "c1_direct", "c1_series", "lower_bound"):
        assert "error" in values[name]
    assert values["lower_bound"]["value"] == pytest.approx(32 / math.sqrt(27))
    assert doc["checks"]["C_above_lower_bound"] is True
    assert doc["ok"] is True


def test_moments_csv(capsys):
    assert main(["moments", "--j", "3", "--l", "50,100,200", "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [int(r["l"]) for r in rows] == [50, 100, 200]
    for r in rows:
        assert float(r["limit"]) == pytest.approx(C3, abs=1e-6)
        assert float(r["scaled"]) == pytest.approx(int(r["l"]) ** 2 * float(r["value"]))


def test_variance_even_l_enforced(capsys):
    assert main(["variance", "--l", "50,51"]) == 2
    assert "even" in capsys.readouterr().err
    assert main(["mc", "--l", "7", "--samples", "10"]) == 2


def test_bad_arguments_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["moments", "--l", "a,b"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_invariant_failure_exit_one(capsys, monkeypatch):
    import sphdefect.constants as mod

    monkeypatch.setattr(mod, "LOWER_BOUND", 1e6)
    status, doc = run_json(capsys, "constants", "--m", "5")
    assert status == 1
    assert doc["ok"] is False


def test_mc_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p, threads in zip(paths, ("1", "4")):
        argv = ["mc", "--l", "16", "--samples", "2000", "--seed", "7", "--output", str(p), "--threads", threads]
        assert main(argv) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    doc = json.loads(paths[0].read_text())
    assert doc["config"]["seed"] == 7
    assert doc["results"][0]["var_stderr"] > 0


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SPHDEFECT_THREADS", "3")
    out = tmp_path / "mc.csv"
    assert main(["mc", "--l", "8", "--samples", "64", "--format", "csv", "-o", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header.split(",") == GOLDEN_COLUMNS["mc"]


def test_cg_and_hilb_checks(capsys):
    status, doc = run_json(capsys, "cg-check", "--l-max", "20")
    assert status == 0 and len(doc["results"]) == 11
    status, doc = run_json(capsys, "hilb-check")
    assert status == 0
    assert [r["l"] for r in doc["results"]] == [50, 100, 200]


def test_report_default_grid(capsys):
    status, doc = run_json(capsys, "report")
    assert status == 0
    assert [r["l"] for r in doc["results"]] == [50, 100, 200, 400]
    assert set(doc["summary"]["moments"]) == {"3", "5"}


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sphdefect", "moments", "--j", "1", "--l", "2,4", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].split(",") == GOLDEN_COLUMNS["moments"]
