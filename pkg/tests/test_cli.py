import json
import math
import os

import pytest

from gaussflow.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ambient_command(capsys):
    code, out, _ = run_cli(capsys, "ambient", "--m", "2", "--point", "0,0,0",
                           "--axes", "0,1")
    assert code == 0
    assert float(out) == pytest.approx(1.0, abs=1e-12)
    code, out, _ = run_cli(capsys, "ambient", "--m", "2", "--point", "0,0,4",
                           "--axes", "0,1")
    assert float(out) == pytest.approx(-3.0 * math.exp(8.0), rel=1e-12)


def test_ambient_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "ambient", "--m", "2", "--point", "0,0,0",
                           "--axes", "1,1")
    assert code == 1 and "error" in err


def test_bounds_command(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--m", "2", "--r0sq", "1")
    assert code == 0
    assert float(out.split("=")[1]) == pytest.approx(1 - math.exp(-0.5), rel=1e-12)
    code, out, _ = run_cli(capsys, "bounds", "--m", "2", "--r0sq", "5")
    assert float(out.split("=")[1]) == pytest.approx(math.exp(-2.5) / 3, rel=1e-12)
    code, out, _ = run_cli(capsys, "bounds", "--m", "2", "--r0sq", "2")
    assert "stationary" in out


def test_sphere_command_with_csv(tmp_path, capsys):
    csv = tmp_path / "series.csv"
    code, out, _ = run_cli(capsys, "sphere", "--m", "2", "--r0sq", "1",
                           "--csv", str(csv))
    assert code == 0 and "event=COLLAPSE" in out
    t_event = float(out.split(" t=")[1].split()[0])
    assert t_event == pytest.approx(0.2650383592, abs=1e-7)
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "t,R_sq"
    assert len(lines) > 10
    t0, r0 = (float(tok) for tok in lines[1].split(","))
    assert (t0, r0) == (0.0, 1.0)
    t_last = float(lines[-1].split(",")[0])
    assert t_last == pytest.approx(t_event, abs=1e-9)


def test_simulate_verify_render_pipeline(tmp_path, capsys):
    out_dir = tmp_path / "run"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "initial.name = circle\ninitial.radius = 0.8\ninitial.n = 64\n"
        f"horizon = 0.02\nsnapshot_stride = 8\noutput_dir = {out_dir}\n"
    )
    code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg))
    assert code == 0 and "stop=HORIZON_REACHED" in out

    code, out, _ = run_cli(capsys, "verify", "--trajectory", str(out_dir),
                           "--claim", "SIGN_PRESERVATION_BELOW", "--eps", "0.1")
    assert code == 0 and "holds" in out
    report = json.loads((out_dir / "claim_sign_preservation_below.json").read_text())
    assert report["holds"] is True

    code, out, _ = run_cli(capsys, "verify", "--trajectory", str(out_dir),
                           "--claim", "SPHERICITY")
    assert code == 0 and "holds" in out

    code, out, _ = run_cli(capsys, "verify", "--trajectory", str(out_dir),
                           "--claim", "SPHERE_BARRIER_BELOW",
                           "--eps", "0.05", "--rp0sq", "0.75")
    assert code == 0 and "holds" in out

    code, out, _ = run_cli(capsys, "render", "--trajectory", str(out_dir))
    assert code == 0
    rendered = os.listdir(out_dir / "render")
    assert any(name.endswith(".svg") for name in rendered)


def test_verify_argument_validation(tmp_path, capsys):
    out_dir = tmp_path / "run"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "initial.name = circle\ninitial.radius = 0.8\ninitial.n = 64\n"
        f"horizon = 0.01\noutput_dir = {out_dir}\n"
    )
    assert run_cli(capsys, "simulate", "--config", str(cfg))[0] == 0
    code, _, err = run_cli(capsys, "verify", "--trajectory", str(out_dir),
                           "--claim", "SIGN_PRESERVATION_BELOW")
    assert code == 1 and "eps" in err
    code, _, err = run_cli(capsys, "verify", "--trajectory", str(out_dir),
                           "--claim", "SPHERE_BARRIER_ABOVE",
                           "--eps", "0.05", "--rp0sq", "0.75")
    assert code == 1  # shrink trajectory cannot satisfy the above-claim


def test_scenario_command_and_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(
        "initial.name = circle\ninitial.radius = 0.8\ninitial.n = 64\n"
        "horizon = 0.01\nsnapshot_stride = 8\nsave_meshes = false\n"
    )
    code, out, _ = run_cli(capsys, "scenario", "SHRINK_INSIDE", "--config", str(cfg))
    assert code == 0          # verdict FAIL (horizon too short) still exits 0
    assert out.startswith("FAIL")
    code, _, err = run_cli(capsys, "scenario", "SHRINK_INSIDE", "--config",
                           str(tmp_path / "missing.cfg"))
    assert code == 1 and "error" in err


def test_scenario_all(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GAUSSFLOW_THREADS", "2")
    (tmp_path / "STATIONARY.cfg").write_text(
        "initial.name = circle\ninitial.radius = 1.0\ninitial.n = 64\n"
        "snapshot_stride = 32\n")
    (tmp_path / "SHRINK_INSIDE.cfg").write_text(
        "initial.name = circle\ninitial.radius = 0.8\ninitial.n = 96\n"
        "snapshot_stride = 64\nsave_meshes = false\n")
    code, out, _ = run_cli(capsys, "scenario", "ALL", "--config", str(tmp_path))
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("PASS") for line in lines)
