import json
import subprocess
import sys

import pytest

from gravbc.cli import main


@pytest.mark.parametrize("argv, code", [
    (["sl-check", "--c2", "1", "--s", "zero"], 0),
    (["sl-check", "--c2", "0", "--s", "zero"], 1),
    (["sl-check", "--c2", "0", "--s", "1,1,-1,0,0,0"], 1),
    (["sl-check", "--c2", "0.2", "--s", "1,2,-1,0,0,0"], 0),
    (["sl-check", "--c2", "1", "--s", "1,2,3"], 2),
    (["sl-check"], 2),
    (["sl-scan", "--c2-range=-1:1:5"], 0),
    (["linearise-check"], 0),
    (["linearise-check", "--drop-h00-term"], 1),
    (["linearise-check", "--warp", "bogus"], 2),
    (["linearise-check", "--s0", "3"], 2),
    (["gauge-check", "--bc", "anderson", "--batch", "5"], 0),
    (["gauge-check", "--bc", "random", "--specs", "4", "--batch", "3"], 0),
    (["gauge-check", "--bc", "dirichlet", "--batch", "3"], 1),
    (["spectrum", "--grid", "5000"], 2),
    (["spectrum", "--modes", "9"], 2),
    (["spectrum", "--bc", "neumann"], 2),
    (["spectrum", "--bc", "general:/nonexistent.ini"], 2),
    (["intertwine-check", "--fields", "3"], 0),
    (["intertwine-check", "--grids", "101"], 2),
])
def test_exit_codes(argv, code):
    assert main(argv) == code


def test_degenerate_spec_exit_code(tmp_path):
    spec = tmp_path / "spec.ini"
    spec.write_text("[boundary]\nC2 = 0\nS = 2,2,2,0,0,0\n")
    assert main(["spectrum", "--bc", f"general:{spec}", "--grid", "21"]) == 3
    assert main(["gauge-check", "--bc", f"general:{spec}", "--batch", "1"]) == 3


def test_general_spec_per_side(tmp_path):
    spec = tmp_path / "spec.ini"
    spec.write_text("[boundary]\nC2 = 1\n[boundary.plus]\nC2 = 0.5\nS = 1,0,-1,0,0,0\nV = 1,0,0\n")
    assert main(["gauge-check", "--bc", f"general:{spec}", "--batch", "2"]) == 0


def test_spectrum_outputs_are_deterministic(tmp_path):
    args = ["spectrum", "--bc", "anderson", "--modes", "0", "--grid", "41", "--plot-data"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for name in ("spectrum.csv", "spectrum.json", "eigenvalues.dat", "gap_vs_xi.gp"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    summary = json.loads((a / "spectrum.json").read_text())
    assert summary["kernel_dim_total"] == 5
    assert summary["kernel_modes"] == [[0, 0, 0]]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[boundary]\nC2 = 0\nS = zero\n[output]\nformats = json\n")
    out = tmp_path / "out"
    assert main(["sl-check", "--config", str(cfg), "--out", str(out)]) == 1
    assert main(["sl-check", "--config", str(cfg), "--c2", "1"]) == 0
    assert (out / "sl_check.json").exists() and not (out / "sl_check.csv").exists()


def test_bad_config_value(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[numerics]\ngrid = many\n")
    assert main(["spectrum", "--config", str(cfg)]) == 2
    assert main(["sl-check", "--config", str(tmp_path / "missing.ini"), "--c2", "1"]) == 2


def test_linearise_csv(tmp_path):
    assert main(["linearise-check", "--out", str(tmp_path), "--lambda-seq", "1e-2,1e-3,1e-4"]) == 0
    rows = (tmp_path / "linearise_check.csv").read_text().splitlines()
    assert rows[0] == "lambda,fd,formula,discrepancy"
    assert len(rows) == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gravbc.cli", "sl-check", "--c2", "1", "--s", "zero"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "elliptic" in proc.stdout
