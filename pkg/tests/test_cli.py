import json
import os
import subprocess
import sys

import pytest

from rauzygasket.cli import main


def run_cli(args):
    return main(args)


def test_certify_outputs(tmp_path):
    out = tmp_path / "c"
    assert run_cli(["certify", "--out", str(out)]) == 0
    data = json.loads((out / "certificates.json").read_text())
    assert data["B1"]["discriminant"] == 1940
    assert data["B2"]["discriminant"] == 229
    assert data["pair"]["twisting"] is True
    assert (out / "certificates.manifest.json").exists()


def test_gasket_deterministic(tmp_path):
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    for out in (out1, out2):
        assert run_cli(["gasket", "--resolution", "48", "--depth", "5",
                        "--out", str(out)]) == 0
    assert (out1 / "gasket.ppm").read_bytes() == (out2 / "gasket.ppm").read_bytes()
    man = json.loads((out1 / "gasket.manifest.json").read_text())
    fr = man["survival_fractions"]
    assert all(a >= b for a, b in zip(fr, fr[1:]))
    csv = (out1 / "gasket_depth.csv").read_text().splitlines()
    assert csv[0] == "row,col,depth"
    assert len(csv) == 1 + 48 * 48


def test_pressure_report(tmp_path):
    out = tmp_path / "p"
    assert run_cli(["pressure", "--nmax", "10", "--out", str(out)]) == 0
    rep = json.loads((out / "kappa0.json").read_text())
    assert 0.5 < rep["kappa0"] < 40
    assert rep["kappa0_shift"] < 0.05
    assert abs(rep["abramov_entropy_ratio"] - rep["kappa0"]) < 0.05
    lines = (out / "pressure.csv").read_text().splitlines()
    assert lines[0] == "kappa,pressure,n_max"
    assert len(lines) > 8


def test_spectrum_report(tmp_path):
    out = tmp_path / "s"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"length": 60000, "streams": 2, "nmax": 12}))
    assert run_cli(["spectrum", "--config", str(cfg), "--seed", "3",
                    "--out", str(out)]) == 0
    rep = json.loads((out / "spectrum.json").read_text())
    assert len(rep["spectra"]) == 2
    lam = rep["lambda_mean"]
    assert lam[0] > 0 > lam[1] > lam[2]
    assert 0.4 < rep["ratio_mean"] < 1.0


def test_spectrum_byte_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"length": 30000, "streams": 1, "nmax": 10}))
    blobs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert run_cli(["spectrum", "--config", str(cfg), "--seed", "5",
                        "--out", str(out)]) == 0
        blobs.append((out / "spectrum.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_trace_command(tmp_path):
    out = tmp_path / "t"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "parameters": ["0.6", "0.25", "0.15"],
        "length": 3000,
    }))
    assert run_cli(["trace", "--config", str(cfg), "--seed", "2",
                    "--level", "0.123456789", "--out", str(out)]) == 0
    man = json.loads((out / "trace.manifest.json").read_text())
    assert man["status"] == "completed"
    assert "nu_hat" in man
    assert (out / "trace.csv").exists() and (out / "trace.svg").exists()


def test_trace_word_parameters(tmp_path):
    out = tmp_path / "tw"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "parameters": {"word": [[3, 1], [3, 1], [3, 5], [2, 2], [3, 1]],
                       "precision": 128},
        "length": 2000,
    }))
    assert run_cli(["trace", "--config", str(cfg), "--seed", "4",
                    "--out", str(out)]) == 0
    man = json.loads((out / "trace.manifest.json").read_text())
    assert man["status"] in ("completed", "closed-loop")


def test_error_is_machine_readable(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"parameters": ["0.5", "0.25", "0.25"]}))
    code = run_cli(["trace", "--config", str(cfg), "--out", str(tmp_path / "e")])
    assert code != 0
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "BadParameters"


def test_console_script_entrypoint(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rauzygasket.cli", "certify",
         "--out", str(tmp_path / "m")],
        capture_output=True, text=True)
    assert proc.returncode == 0
