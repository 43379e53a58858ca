"""End-to-end tests for the command line interface."""

import json

import numpy as np
import pytest

from interlock.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_assemble_from_group(tmp_path, capsys):
    out = tmp_path / "asm"
    code, stdout, _ = run(
        capsys, "assemble", "--group", "p4", "--rows", "3", "--cols", "3", "--out", str(out)
    )
    assert code == 0
    assert f"wrote 9 blocks to {out}" in stdout
    assert (out / "manifest.json").exists()
    assert (out / "assembly.stl").exists()
    assert len(list(out.glob("block_*.stl"))) == 9


def test_assemble_from_tiling_file(tmp_path, capsys):
    tiling = {"rows": 3, "cols": 3, "orientations": [0] * 9}
    path = tmp_path / "tiling.json"
    path.write_text(json.dumps(tiling))
    out = tmp_path / "asm"
    code, stdout, _ = run(capsys, "assemble", "--tiling", str(path), "--out", str(out))
    assert code == 0
    assert json.loads((out / "manifest.json").read_text())["group"] is None


def test_flow_golden_total_and_grid(tmp_path, capsys):
    out = tmp_path / "flow"
    code, stdout, _ = run(
        capsys, "flow", "--group", "p1", "--rows", "10", "--cols", "10", "--out", str(out)
    )
    assert code == 0
    assert "total=64.000000" in stdout
    rows = [
        [float(v) for v in ln.split(",")]
        for ln in (out / "flow.csv").read_text().splitlines()
    ]
    grid = np.array(rows)
    assert grid.shape == (10, 10)
    assert grid[0, 1] == pytest.approx(6.43, abs=0.005)
    payload = json.loads((out / "flow.json").read_text())
    assert payload["total_frame_mass"] == pytest.approx(64.0, abs=1e-6)


def test_flow_reruns_are_byte_identical(tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        code, _, _ = run(
            capsys, "flow", "--group", "pg", "--rows", "8", "--cols", "8", "--out", str(out)
        )
        assert code == 0
    assert (out1 / "flow.csv").read_bytes() == (out2 / "flow.csv").read_bytes()
    assert (out1 / "flow.json").read_bytes() == (out2 / "flow.json").read_bytes()


def test_flow_methods_agree(tmp_path, capsys):
    outs = []
    for method in ("iterate", "closed_form"):
        out = tmp_path / method
        code, stdout, _ = run(
            capsys,
            "flow", "--group", "p4", "--rows", "6", "--cols", "6",
            "--method", method, "--out", str(out),
        )
        assert code == 0
        assert "total=16.000000" in stdout
        outs.append(json.loads((out / "flow.json").read_text())["frame_load"])
    for k, v in outs[0].items():
        assert v == pytest.approx(outs[1][k], abs=1e-6)


def test_flow_svg_flag(tmp_path, capsys):
    out = tmp_path / "flow"
    code, _, _ = run(
        capsys,
        "flow", "--group", "p4", "--rows", "4", "--cols", "4", "--svg", "--out", str(out),
    )
    assert code == 0
    assert (out / "flow.svg").read_text().startswith("<?xml")


def test_flow_unconverged_exit_code(tmp_path, capsys):
    code, _, stderr = run(
        capsys,
        "flow", "--group", "pg", "--rows", "10", "--cols", "10",
        "--max-iter", "3", "--out", str(tmp_path / "x"),
    )
    assert code == 4
    assert "did not converge" in stderr
    assert not (tmp_path / "x" / "flow.csv").exists()


def test_enumerate_small_grid(tmp_path, capsys):
    out = tmp_path / "enum"
    code, stdout, _ = run(
        capsys,
        "enumerate", "--rows", "3", "--cols", "3", "--top-k", "2", "--out", str(out),
    )
    assert code == 0
    assert "candidates=8" in stdout
    assert "wall_clock=" in stdout
    assert (out / "ranking.csv").exists()
    assert (out / "ranking.json").exists()
    assert (out / "rank_001" / "assembly.stl").exists()
    assert (out / "rank_002" / "manifest.json").exists()


def test_enumerate_cap_guard(tmp_path, capsys):
    code, _, stderr = run(
        capsys,
        "enumerate", "--rows", "12", "--cols", "12", "--out", str(tmp_path / "e"),
    )
    assert code == 2
    assert "rerun with --cap 21" in stderr


def test_unknown_group_is_invalid(tmp_path, capsys):
    code, _, stderr = run(
        capsys,
        "assemble", "--group", "p6", "--rows", "3", "--cols", "3",
        "--out", str(tmp_path / "x"),
    )
    assert code == 2
    assert "error:" in stderr


def test_group_and_tiling_are_mutually_exclusive(tmp_path, capsys):
    tiling = tmp_path / "t.json"
    tiling.write_text(json.dumps({"rows": 3, "cols": 3, "orientations": [0] * 9}))
    code, _, _ = run(
        capsys,
        "assemble", "--group", "p1", "--rows", "3", "--cols", "3",
        "--tiling", str(tiling), "--out", str(tmp_path / "x"),
    )
    assert code == 2
    code, _, _ = run(capsys, "assemble", "--out", str(tmp_path / "x"))
    assert code == 2


def test_missing_tiling_file_is_io_error(tmp_path, capsys):
    code, _, stderr = run(
        capsys, "assemble", "--tiling", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x")
    )
    assert code == 3


def test_malformed_tiling_json_is_invalid(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "assemble", "--tiling", str(bad), "--out", str(tmp_path / "x"))
    assert code == 2


def test_clashing_tiling_is_invalid(tmp_path, capsys):
    clash = tmp_path / "clash.json"
    clash.write_text(json.dumps({"rows": 1, "cols": 2, "orientations": [0, 1]}))
    code, _, stderr = run(capsys, "assemble", "--tiling", str(clash), "--out", str(tmp_path / "x"))
    assert code == 2
    assert "error:" in stderr


def test_thread_cap_env_smoke(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("INTERLOCK_THREADS", "1")
    code, stdout, _ = run(
        capsys, "flow", "--group", "p1", "--rows", "4", "--cols", "4",
        "--out", str(tmp_path / "x"),
    )
    assert code == 0
    assert "total=4.000000" in stdout
