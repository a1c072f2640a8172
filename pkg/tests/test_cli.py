import json
import subprocess
import sys

import pytest

from twistbethe.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, UsageError, main, parse_args


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_even_pair(capsys):
    code, out, _ = run(capsys, "classify", "--model", "xxx", "--spin", "1/2", "-N", "4", "-M", "2", "--roots", "0.5i,-0.5i")
    assert code == EXIT_OK and out.startswith("SingularPhysical")


def test_classify_odd_pair_json(capsys):
    code, out, _ = run(capsys, "classify", "-N", "5", "-M", "2", "--roots", "i/2,-i/2", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["type"] == "ClassificationResult"
    assert doc["data"]["kind"] == "SingularUnphysical"


def test_expand_worked_example(capsys):
    code, out, _ = run(capsys, "expand", "-N", "4", "-M", "2", "--order", "4", "--precision", "40")
    assert code == EXIT_OK
    assert "c(1) = 0.25 + 0i" in out
    assert "c(3) = -0.01041666666666666666666666666666666666667 + 0i" in out
    assert "c(4) = 0 + 0.00390625i" in out and "c(4) = 0 - 0.00390625i" in out


def test_expand_json_out(capsys, tmp_path):
    path = tmp_path / "s.json"
    code, out, _ = run(capsys, "expand", "-N", "4", "-M", "2", "--format", "json", "--out", str(path))
    assert code == EXIT_OK
    assert json.loads(path.read_text())["type"] == "TwistSeries"


def test_solve_and_census(capsys):
    code, out, _ = run(capsys, "solve", "-N", "4", "-M", "2")
    assert code == EXIT_OK and "SingularPhysical" in out and "Regular" in out
    code, out, _ = run(capsys, "census", "-N", "3")
    assert code == EXIT_OK and "ED cross-check ok" in out


def test_solve_polishes_given_roots(capsys):
    code, out, _ = run(capsys, "solve", "-N", "4", "-M", "2", "--beta", "0.1", "--roots", "0.025+0.5i,0.025-0.5i")
    assert code == EXIT_OK and "Regular" in out


def test_verify_pair(capsys):
    code, out, _ = run(capsys, "verify", "-N", "4", "-M", "2", "--roots", "i/2,-i/2")
    assert code == EXIT_OK and out.rstrip().endswith("PASS")


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "-N", "4", "-M", "2", "--beta", "0.1")
    assert code == EXIT_OK and out.rstrip().endswith("complete")


@pytest.mark.parametrize("argv", [
    ["solve", "-N", "4", "-M", "3"],
    ["solve", "-N", "4"],
    ["classify", "-N", "4", "-M", "2"],
    ["classify", "-N", "4", "-M", "2", "--roots", "0.5i"],
    ["classify", "-N", "4", "-M", "2", "--roots", "zz"],
    ["solve", "-N", "4", "-M", "1", "--bogus"],
    ["solve", "-N", "0", "-M", "0"],
    ["solve", "-N", "4", "-M", "1", "--spin", "1/3"],
    ["census", "-N", "4", "--beta", "0.1"],
    ["expand", "-N", "4", "-M", "2", "--precision", "-3"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and "twistbethe" in err


@pytest.mark.parametrize("argv", [
    ["expand", "-N", "5", "-M", "2"],
    ["verify", "-N", "4", "-M", "2", "--roots", "0.3,-0.1"],
    ["solve", "-N", "4", "-M", "2", "--roots", "3+3i,5-2i"],
])
def test_numerical_failures(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_NUMERIC


def test_precision_env_default(monkeypatch):
    monkeypatch.setenv("TWISTBETHE_PRECISION", "30")
    assert parse_args(["classify", "-N", "4", "-M", "2", "--roots", "i/2,-i/2"]).precision == 30
    monkeypatch.delenv("TWISTBETHE_PRECISION")
    assert parse_args(["expand", "-N", "4", "-M", "2"]).precision == 40
    with pytest.raises(UsageError):
        parse_args(["verify", "-N", "4", "-M", "2"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twistbethe", "classify", "-N", "6", "-M", "2", "--roots", "i/2,-i/2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("SingularPhysical")
