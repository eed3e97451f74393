import json
import subprocess
import sys

import pytest

from icnsim.cli import main
from icnsim.metrics import load_csv


def _cfg(tmp_path, text):
    f = tmp_path / "o.cfg"
    f.write_text(text)
    return str(f)


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "flood-nonexistent", "--desk-scale", "--config", _cfg(tmp_path, "total = 400\n"),
                 "--out", str(out)])
    assert code == 0
    for f in ("pit.csv", "link.csv", "scenario.json", "summary.txt", "verdict.txt"):
        assert (out / f).exists(), f
    assert json.loads((out / "scenario.json").read_text())["knobs"]["total"] == 400
    assert (out / "verdict.txt").read_text() == "no_drops_below_capacity: PASS\npit_plateau_equals_total: PASS\n"
    assert load_csv(out).nodes("pit_size") == ["R1", "R2"]
    assert "R1: pit mean" in capsys.readouterr().out


def test_failed_property_exits_one(tmp_path):
    # the hijack is scheduled after the run ends, so its properties cannot hold
    code = main(["run", "attack-hijack", "--desk-scale", "--config", _cfg(tmp_path, "duration_s = 4\n"),
                 "--out", str(tmp_path / "r")])
    assert code == 1
    assert "FAIL" in (tmp_path / "r" / "verdict.txt").read_text()


@pytest.mark.parametrize("text,needle", [("frobnicate = 1\n", "frobnicate"), ("total = -5\n", "total"),
                                         ("total\n", "line 1")])
def test_bad_config_exits_two(tmp_path, capsys, text, needle):
    code = main(["run", "flood-nonexistent", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "r")])
    assert code == 2
    assert needle in capsys.readouterr().err
    assert not (tmp_path / "r").exists()


def test_unknown_scenario_exits_two(capsys):
    assert main(["run", "no-such-scenario"]) == 2
    assert "sim list" in capsys.readouterr().err


def test_bad_arguments_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["analytic", "--table", "nope"])
    assert exc.value.code == 2


def test_list(capsys):
    assert main(["list", "--desk-scale"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 18 and lines[0].startswith("flood-nonexistent")


def test_analytic_tables(tmp_path, capsys):
    assert main(["analytic", "--table", "memory"]) == 0
    assert "156,250" in capsys.readouterr().out
    params = _cfg(tmp_path, "alphas = [500]\nrtt_mean_s = 0.1\nrtt_std_s = 0.1\nkappa = 4\n")
    assert main(["analytic", "--table", "states", "--params", params]) == 0
    assert "250" in capsys.readouterr().out
    assert main(["analytic", "--table", "states", "--params", _cfg(tmp_path, "rtt_mean_s = 0\n")]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "icnsim.cli", "analytic", "--table", "memory"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "PIT entries" in proc.stdout
