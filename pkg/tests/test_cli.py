from __future__ import annotations

import json
import subprocess
import sys

import pytest

from upsum.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sigma_paper(capsys):
    code, out, _ = run_cli(capsys, "sigma", "--max-len", "6", "--max-steps", "100", "--mode", "paper")
    assert code == 0
    doc = json.loads(out)
    assert doc["canonical"]["terms"] == [["0/2^0", "31/2^5"]]
    assert doc["sigma"]["float"] == [0.96875, 0.0]
    assert doc["version"] == 1


def test_sigma_enclosure(capsys):
    code, out, _ = run_cli(capsys, "sigma", "--max-len", "6", "--max-steps", "100", "--mode", "enclosure")
    doc = json.loads(out)
    assert code == 0
    assert doc["enclosure"]["radius"] == "29/2^5"


def test_enumerate_len4(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--max-len", "4", "--max-steps", "100")
    doc = json.loads(out)
    assert code == 0
    assert [r["program"] for r in doc["halted"]] == ["1111"]
    assert doc["halted_mass"] == {"exact": "1/2^4", "float": 0.0625}


def test_output_is_deterministic_and_round_trips(capsys):
    args = ("enumerate", "--max-len", "10", "--max-steps", "200")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    assert json.dumps(json.loads(first), sort_keys=True, indent=2) + "\n" == first


def test_workers_env_does_not_change_output(capsys, monkeypatch):
    args = ("sigma", "--max-len", "12", "--max-steps", "300")
    monkeypatch.setenv("UPSUM_WORKERS", "1")
    _, one, _ = run_cli(capsys, *args)
    monkeypatch.setenv("UPSUM_WORKERS", "3")
    _, three, _ = run_cli(capsys, *args)
    assert one == three


def test_cache_resume(capsys, tmp_path):
    cache = tmp_path / "c.json"
    run_cli(capsys, "enumerate", "--max-len", "6", "--max-steps", "100", "--cache", str(cache))
    assert cache.exists()
    _, resumed, _ = run_cli(capsys, "enumerate", "--max-len", "9", "--max-steps", "100", "--cache", str(cache))
    _, fresh, _ = run_cli(capsys, "enumerate", "--max-len", "9", "--max-steps", "100")
    assert resumed == fresh
    code, _, err = run_cli(capsys, "enumerate", "--max-len", "7", "--max-steps", "100", "--cache", str(cache))
    assert code == 2 and "larger budget" in err


def test_cache_hash_mismatch_surfaces(capsys, tmp_path):
    cache = tmp_path / "c.json"
    run_cli(capsys, "enumerate", "--max-len", "5", "--max-steps", "100", "--cache", str(cache))
    data = json.loads(cache.read_text())
    data["machine"] = "0" * 64
    cache.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "sigma", "--max-len", "5", "--max-steps", "100", "--cache", str(cache))
    assert code == 2 and "does not match current machine" in err


def test_event(capsys):
    args = ["event", "--header", "1001110001111101010", "--k", "1", "--grain", "0", "--grain", "1", "--epsilon", "1e-9"]
    code, out, _ = run_cli(capsys, *args)
    doc = json.loads(out)
    assert code == 0 and doc["consistent"] and doc["partition"]
    assert [g["probability"] for g in doc["grains"]] == [0.5, 0.5]


def test_event_strict_failure(capsys):
    args = ["event", "--header", "1000110111111100001", "--k", "1", "--grain", "0", "--grain", "1", "--epsilon", "1e-9"]
    assert run_cli(capsys, *args)[0] == 0
    assert run_cli(capsys, *args, "--strict")[0] == 1


def test_event_bad_header(capsys):
    code, _, err = run_cli(capsys, "event", "--header", "1111", "--k", "1", "--grain", "*", "--epsilon", "0.1")
    assert code == 2 and "path" in err


def test_circuit_amp(capsys, tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("H 0\nT 0\nCNOT 0 1\nH 0\n")
    code, out, _ = run_cli(capsys, "circuit", "amp", "--file", str(f), "--in", "00", "--out", "11", "--check-oracle")
    doc = json.loads(out)
    assert code == 0 and doc["oracle"]["agrees"]
    assert doc["paths"] == 4


def test_circuit_realpart(capsys, tmp_path):
    f = tmp_path / "t.txt"
    f.write_text("T 0\n")
    code, out, _ = run_cli(capsys, "circuit", "realpart", "--file", str(f), "--check-oracle")
    doc = json.loads(out)
    assert code == 0 and abs(doc["probability"] - 0.8535533905932737) < 1e-12


def test_xlate_check(capsys):
    code, out, _ = run_cli(capsys, "xlate-check", "--max-len", "10", "--max-steps", "100")
    assert code == 0 and json.loads(out)["passed"]


def test_trace(capsys):
    code, out, _ = run_cli(capsys, "trace", "--program", "001111", "--dialect", "B")
    assert code == 0
    assert out.splitlines() == ["1 0 OUT1 0 0 1", "2 2 HALT 0 0 1"]


@pytest.mark.parametrize(
    "argv",
    [
        ["sigma", "--max-len", "0", "--max-steps", "10"],
        ["sigma", "--max-len", "5"],
        ["event", "--header", "0", "--k", "1", "--grain", "0", "--epsilon", "2"],
        ["frobnicate"],
        ["enumerate", "--max-len", "4", "--max-steps", "10", "--bogus"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run_cli(capsys, *argv)[0] == 2


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "upsum", "sigma", "--max-len", "6", "--max-steps", "100"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert "31/2^5" in res.stdout
