import csv
import hashlib
import json
import subprocess
import sys

import pytest

from penaltyfv.cli import EXIT_BLOW_UP, EXIT_INVALID, EXIT_OK, main

SMALL_RUN = """\
run:
  scheme: optimal
  eps: 1e-2
  n_cells: 100
  t_end: 0.05
  snapshot_every: 10
"""

ISOARDI = """\
run:
  scheme: isoardi
  case: isoardi
  M0: 1
  eps: 1e-3
  n_cells: 160
  t_end: 1.0
"""


def _cfg(tmp_path, text, name="c.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_snapshots_and_manifest(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", _cfg(tmp_path, SMALL_RUN), "--out", str(out), "--emit-plots"])
    assert code == EXIT_OK
    rows = _read_csv(out / "snapshots.csv")
    assert list(rows[0]) == ["t", "x", "N", "Gamma", "M"]
    assert {float(r["t"]) for r in rows} >= {0.0, 0.05}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "completed"
    assert manifest["config"]["n_cells"] == 100
    for entry in manifest["files"]:
        data = (out / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]
    assert (out / "profiles.gp").exists()


def test_run_is_deterministic(tmp_path):
    cfg = _cfg(tmp_path, SMALL_RUN)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "snapshots.csv").read_bytes()
    b = (tmp_path / "b" / "snapshots.csv").read_bytes()
    assert a == b


def test_isoardi_run_exits_with_blow_up(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--config", _cfg(tmp_path, ISOARDI), "--out", str(out)])
    assert code == EXIT_BLOW_UP
    (row,) = _read_csv(out / "blowup.csv")
    assert float(row["max_abs_M"]) >= 10.0
    assert 0.0 < float(row["t_stop"]) < 0.1
    assert json.loads((out / "manifest.json").read_text())["status"] == "blow_up"


@pytest.mark.parametrize(
    "command,text",
    [
        ("run", "run:\n  scheme: optimal\n  eps: -1\n"),
        ("run", "run: [\n"),
        ("sweep-eps", SMALL_RUN),  # no sweep section
        ("sweep-eps", SMALL_RUN + "sweep:\n  eps: [1e-2]\n"),
        ("mesh-study", SMALL_RUN + "mesh_study:\n  meshes: [100, 200]\n"),
        ("eta-study", SMALL_RUN + "sweep:\n  eps: [1e-1, 1e-2, 1e-3]\neta_study:\n  etas: []\n"),
    ],
)
def test_invalid_configs_exit_2_without_output(tmp_path, capsys, command, text):
    out = tmp_path / "out"
    code = main([command, "--config", _cfg(tmp_path, text), "--out", str(out)])
    assert code == EXIT_INVALID
    assert not out.exists()
    assert "error:" in capsys.readouterr().err


def test_error_message_names_line(tmp_path, capsys):
    main(["run", "--config", _cfg(tmp_path, "run:\n  n_cells: 50\n  eps: 0\n", "bad.yaml")])
    assert "bad.yaml:3:" in capsys.readouterr().err


def test_bad_arguments_exit_2(tmp_path):
    assert main(["launch"]) == EXIT_INVALID
    assert main(["run"]) == EXIT_INVALID
    assert main(["run", "--config", _cfg(tmp_path, SMALL_RUN), "--workers", "0"]) == EXIT_INVALID


def test_sweep_eps_outputs(tmp_path):
    text = SMALL_RUN + "sweep:\n  eps: [1e-1, 1e-2, 1e-3]\n"
    out = tmp_path / "out"
    assert main(["sweep-eps", "--config", _cfg(tmp_path, text), "--out", str(out)]) == EXIT_OK
    errors = _read_csv(out / "errors.csv")
    assert {float(r["eps"]) for r in errors} == {0.1, 0.01, 0.001}
    assert {r["region"] for r in errors} == {"plasma", "limiter"}
    rates = _read_csv(out / "rates.csv")
    assert rates and all(r["scheme"] == "optimal" for r in rates)


def test_mesh_study_orders(tmp_path):
    text = (
        "run:\n  geometry: plasma_only\n  scheme: none\n  n_cells: 40\n  t_end: 0.1\n"
        "mesh_study:\n  meshes: [40, 80, 160]\n"
    )
    out = tmp_path / "out"
    assert main(["mesh-study", "--config", _cfg(tmp_path, text), "--out", str(out)]) == EXIT_OK
    rows = _read_csv(out / "orders.csv")
    assert [int(r["n_cells"]) for r in rows] == [40, 80, 160]
    assert float(rows[-1]["order"]) > 1.5


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "penaltyfv", "run", "--config", _cfg(tmp_path, SMALL_RUN),
         "--out", str(tmp_path / "m")],
        capture_output=True, text=True,
    )
    assert proc.returncode == EXIT_OK, proc.stderr
    assert (tmp_path / "m" / "snapshots.csv").exists()
