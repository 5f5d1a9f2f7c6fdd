import json
import subprocess
import sys

import pytest

from modhand.cli import main
from modhand.params import params_to_dict, default_params


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_ucm_report_default(capsys):
    code, out, _ = run_cli(["ucm-report", "--config", "default"], capsys)
    assert code == 0
    assert "constraint rank         3" in out
    assert "positive definite       True" in out


def test_ucm_report_json(capsys):
    code, out, _ = run_cli(["ucm-report", "--config", "default", "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["constraint_rank"] == 3
    assert payload["positive_definite"] is True
    assert payload["active_force_row"] == [15.125, 12.5, 8.0]


def test_workspace_rejects_zero_n(capsys):
    code, _, err = run_cli(["workspace", "--n", "0"], capsys)
    assert code == 1
    assert "--n" in err


def test_unknown_flag_exits_1(capsys):
    code, _, _ = run_cli(["workspace", "--n", "5", "--frobnicate"], capsys)
    assert code == 1


def test_unknown_subcommand_exits_1(capsys):
    code, _, _ = run_cli(["warp-drive"], capsys)
    assert code == 1


def test_workspace_deterministic_with_manifest(tmp_path, capsys):
    out1 = tmp_path / "cloud1.csv"
    out2 = tmp_path / "cloud2.csv"
    for out in (out1, out2):
        code, _, _ = run_cli(
            ["workspace", "--n", "200", "--seed", "5", "--out", str(out)], capsys
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()
    m1 = json.loads((tmp_path / "cloud1.csv.manifest.json").read_text())
    m2 = json.loads((tmp_path / "cloud2.csv.manifest.json").read_text())
    assert m1["config_digest"] == m2["config_digest"]
    assert m1["seed"] == 5
    assert m1["subcommand"] == "workspace"
    assert m1["outputs"] == [str(out1)]


def test_workspace_csv_header_and_projection(tmp_path, capsys):
    out = tmp_path / "cloud.csv"
    run_cli(["workspace", "--n", "10", "--seed", "1", "--out", str(out)], capsys)
    assert out.read_text().splitlines()[0] == "x_mm,y_mm,z_mm"
    run_cli(
        ["workspace", "--n", "10", "--seed", "1", "--project", "xoy", "--out", str(out)],
        capsys,
    )
    lines = out.read_text().splitlines()
    assert lines[0] == "u_mm,v_mm"
    assert len(lines) == 11


def test_ucm_seed_env_override(tmp_path, capsys, monkeypatch):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    monkeypatch.setenv("UCM_SEED", "77")
    run_cli(["workspace", "--n", "50", "--out", str(out_a)], capsys)
    monkeypatch.delenv("UCM_SEED")
    run_cli(["workspace", "--n", "50", "--seed", "77", "--out", str(out_b)], capsys)
    assert out_a.read_bytes() == out_b.read_bytes()


def test_drive_map_json(capsys):
    code, out, _ = run_cli(
        ["drive-map", "--a1", "1", "--a2", "1", "--format", "json"], capsys
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["theta_rad"][0] == pytest.approx(13.0 / 24.0, abs=1e-9)
    assert payload["theta_rad"][1] == 0.0


def test_drive_map_rigid_chain(capsys):
    code, out, _ = run_cli(
        ["drive-map", "--a1", "1", "--a2", "-1", "--format", "json"], capsys
    )
    # values pass through the 9-significant-digit output format
    payload = json.loads(out)
    q1, q2, q3 = payload["rigid_flexion_rad"]
    assert q2 == pytest.approx(q1 * 7.0 / 6.0, rel=1e-8)
    assert q3 == pytest.approx(q1 * 0.7, rel=1e-8)


def test_envelop_infeasible_exits_2(tmp_path, capsys):
    out = tmp_path / "trace.jsonl"
    code, _, _ = run_cli(
        [
            "envelop",
            "--sphere-d", "20",
            "--center", "20,3,0",
            "--a-max", "10",
            "--steps", "20",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == 2
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records[-1]["status"] == "non-converged"


def test_envelop_successful_trace(tmp_path, capsys):
    config = tmp_path / "springs.json"
    doc = params_to_dict(default_params())
    doc["springs"] = {"serial": 200.0, "parallel": [300.0, 300.0, 0.2]}
    config.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "trace.jsonl"
    code, _, _ = run_cli(
        [
            "envelop",
            "--config", str(config),
            "--sphere-d", "40",
            "--center", "34,28,0",
            "--a-max", "27.5",
            "--steps", "160",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 160
    assert records[-1]["status"] == "completed"
    final_forces = [c["force_n"] for c in records[-1]["contacts"]]
    assert sum(1 for f in final_forces if f > 0) >= 3
    assert all(len(r["q_deg"]) == 4 for r in records)


def test_envelop_validates_center(capsys):
    code, _, err = run_cli(
        ["envelop", "--sphere-d", "20", "--center", "1,2", "--a-max", "5"], capsys
    )
    assert code == 1
    assert "--center" in err


def test_hand_fk_text(capsys):
    code, out, _ = run_cli(["hand-fk"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("finger")
    assert len(out.splitlines()) == 6


def test_hand_fk_joints_file(tmp_path, capsys):
    joints = tmp_path / "joints.json"
    joints.write_text(json.dumps([[0, 0.5, 0.3, 0.2]] * 5), encoding="utf-8")
    code, out, _ = run_cli(
        ["hand-fk", "--joints", str(joints), "--format", "json"], capsys
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload["fingers"]) == {"thumb", "index", "middle", "ring", "little"}


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "modhand.cli", "drive-map", "--a1", "0", "--a2", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "theta1_rad" in proc.stdout


def test_identical_argv_byte_identical_stdout():
    argv = [sys.executable, "-m", "modhand.cli", "ucm-report", "--format", "json"]
    a = subprocess.run(argv, capture_output=True).stdout
    b = subprocess.run(argv, capture_output=True).stdout
    assert a == b
