import json

import numpy as np
import pytest

from prwalk import cli
from prwalk.core import Direction

UNIT = {(1, 0), (0, 1), (-1, 0), (0, -1)}


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_matrix(path, rows):
    path.write_text("\n".join(" ".join(str(v) for v in r) for r in rows) + "\n")
    return path


@pytest.fixture
def w_file(tmp_path):
    return write_matrix(tmp_path / "w.txt", [[0.25] * 4] * 4)


# -- analyze-matrix -----------------------------------------------------------------


def test_analyze_w(capsys, w_file):
    code, out, _ = run(capsys, "analyze-matrix", w_file)
    assert code == 0
    assert "classification: RecurrentCLT" in out
    assert "velocity: (0, 0)" in out
    assert "|Q-W| = 0" in out
    assert "0.5:yes" in out


def test_analyze_ballistic(capsys, tmp_path):
    path = write_matrix(tmp_path / "b.txt", [[0.7, 0.1, 0.1, 0.1]] * 4)
    code, out, _ = run(capsys, "analyze-matrix", path)
    assert code == 0
    assert "classification: Ballistic" in out
    assert "velocity: (0.6, 0)" in out
    assert "not doubly stochastic" in out


def test_analyze_jsonl(capsys, w_file):
    code, out, _ = run(capsys, "analyze-matrix", w_file, "--format", "jsonl")
    rec = json.loads(out)
    assert code == 0
    assert rec["doubly_stochastic"] is True
    assert rec["deviation_norm"] == pytest.approx(0.0, abs=1e-12)
    assert all(rec["toth"].values())


def test_analyze_parse_error_exits_one(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.25 0.25 0.25 0.25\n0.25 0.25 x 0.25\n")
    code, out, err = run(capsys, "analyze-matrix", path)
    assert code == 1 and out == ""
    assert "line 2, column 11" in err


def test_analyze_rejects_non_stochastic(capsys, tmp_path):
    path = write_matrix(tmp_path / "m.txt", [[0.5, 0.5, 0.5, 0.0]] + [[0.25] * 4] * 3)
    code, _, err = run(capsys, "analyze-matrix", path)
    assert code == 1 and err


# -- gen-env ----------------------------------------------------------------------


def test_gen_env_footers(capsys):
    _, flr, _ = run(capsys, "gen-env", "--env", "flr", "--eps", "0.1", "--box", "4x4")
    assert flr.splitlines()[-1].startswith("# audit:")
    assert "toth: all" in flr.splitlines()[-1]
    _, lr, _ = run(capsys, "gen-env", "--env", "leftright", "--eps", "0.2", "--box", "4x4")
    assert "toth: none" in lr.splitlines()[-1]
    assert len([ln for ln in flr.splitlines() if not ln.startswith("#")]) == 16


def test_gen_env_missing_family_parameter_is_usage_error(capsys):
    code, _, err = run(capsys, "gen-env", "--env", "flr")
    assert code == 2 and "--eps" in err


def test_snapshot_round_trip_gives_same_trajectory(capsys, tmp_path):
    snap = tmp_path / "env.txt"
    box = "-30:31,-30:31"
    run(capsys, "gen-env", "--env", "backward-inhom", "--zeta", "0.1,0.9", "--seed", 4,
        f"--box={box}", "--out", snap)
    assert snap.read_text().startswith(f"# {cli.SNAPSHOT_SCHEMA}")
    args = ("simulate", "--horizon", 25, "--seed", 8)
    _, direct, _ = run(capsys, *args, "--env", "backward-inhom", "--zeta", "0.1,0.9", "--env-seed", 4)
    _, replay, _ = run(capsys, *args, "--env-file", snap)
    assert direct == replay
    assert len(direct.splitlines()) == 26


def test_snapshot_parse_error(tmp_path):
    with pytest.raises(cli.ParseError):
        cli.read_snapshot("0 0 0.25 0.25\n")
    with pytest.raises(cli.ParseError):
        cli.read_snapshot("# box=0:1,0:1\n0 0 " + " ".join(["0.5"] * 16) + "\n")


# -- simulate ---------------------------------------------------------------------


def test_simulate_reruns_are_byte_identical(capsys):
    argv = ("simulate", "--env", "flr", "--eps", "0.1", "--horizon", 200, "--seed", 3, "--format", "csv")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    lines = a.splitlines()
    assert lines[0] == f"# schema={cli.TRAJECTORY_SCHEMA}"
    assert lines[1] == "step,x1,x2,direction"
    assert len(lines) == 2 + 201


def test_simulate_formats_agree(capsys):
    base = ("simulate", "--horizon", 30, "--seed", 5, "--start", "2,-1,S")
    _, text, _ = run(capsys, *base)
    _, jl, _ = run(capsys, *base, "--format", "jsonl")
    traj = cli.read_trajectory(text)
    recs = [json.loads(ln) for ln in jl.splitlines()]
    assert recs[0] == {"step": 0, "x1": 2, "x2": -1, "direction": "S"}
    pos = traj.positions()
    assert [[r["x1"], r["x2"]] for r in recs] == pos.tolist()
    assert [r["direction"] for r in recs[1:]] == [Direction(int(k)).name for k in traj.steps]


def test_read_trajectory_errors():
    with pytest.raises(cli.ParseError):
        cli.read_trajectory("")
    with pytest.raises(cli.ParseError):
        cli.read_trajectory("0 0\nE\n")
    with pytest.raises(cli.ParseError):
        cli.read_trajectory("0 0 N\nE\nQ\n")


# -- ensembles and config ----------------------------------------------------------


def test_straight_line_recurrence_is_zero(capsys):
    code, out, _ = run(capsys, "recurrence", "--matrix", "straight-line", "--horizon", 64, "--ensemble", 10)
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[2:]]
    assert [r[0] for r in rows] == ["1", "2", "4", "8", "16", "32", "64"]
    assert all(float(r[1]) == 0.0 for r in rows)


def test_msd_jsonl(capsys):
    code, out, _ = run(capsys, "msd", "--horizon", 16, "--ensemble", 50, "--format", "jsonl")
    d = json.loads(out)
    assert code == 0 and d["checkpoints"][-1] == 16


def test_config_file_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nenv = flr\neps = 0.1\nhorizon = 40\nseed = 2\nformat = csv\n")
    _, from_cfg, _ = run(capsys, "simulate", "--config", cfg)
    _, explicit, _ = run(capsys, "simulate", "--env", "flr", "--eps", "0.1", "--horizon", 40,
                         "--seed", 2, "--format", "csv")
    assert from_cfg == explicit
    _, override, _ = run(capsys, "simulate", "--config", cfg, "--horizon", 10)
    assert len(override.splitlines()) == 2 + 11


def test_config_boolean_and_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("env = backward-inhom\nzeta = 0,1\nforbid-trap = yes\nbox = 3x3\n")
    code, out, _ = run(capsys, "gen-env", "--config", cfg)
    assert code == 0 and "forbid_trap=1" in out
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "gen-env", "--config", cfg)
    assert code == 2 and "colour" in err


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "simulate", "--bogus")[0] == 2
    assert run(capsys, "simulate", "--horizon", 0)[0] == 2
    assert run(capsys, "simulate", "--env", "nowhere")[0] == 2
    assert run(capsys, "simulate", "--matrix", "no-such-preset")[0] == 2
    assert run(capsys, "accept", "--only", "99")[0] == 2


def test_velocity_and_clt_outputs(capsys):
    code, out, _ = run(capsys, "velocity", "--matrix", "ballistic", "--horizon", 2000, "--ensemble", 200,
                       "--format", "jsonl")
    v = json.loads(out)
    assert code == 0
    assert v["velocity"][0] == pytest.approx(0.6, abs=0.02)
    code, out, _ = run(capsys, "clt", "--horizon", 200, "--ensemble", 500, "--format", "jsonl")
    c = json.loads(out)
    assert code == 0 and c["centered"] is True
    assert np.allclose(c["covariance"], np.eye(2) / 2, atol=0.1)


# -- dual ---------------------------------------------------------------------------


def test_dual_check_passes(capsys):
    code, out, _ = run(capsys, "dual-check", "--box", "6x6")
    assert code == 0
    assert out.rstrip().endswith("ok")


def test_project_block_pairs_nearest_neighbour(capsys, tmp_path):
    traj = tmp_path / "t.txt"
    run(capsys, "simulate", "--env", "leftright", "--eps", "0.2", "--horizon", 400, "--seed", 3, "--out", traj)
    code, out, _ = run(capsys, "project", "--trajectory", traj, "--scheme", "block-pairs", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"# schema={cli.PROJECTION_SCHEMA} scheme=block-pairs"
    ys = [tuple(int(v) for v in ln.split(",")[1:]) for ln in lines[2:]]
    assert len(ys) == 201 and ys[0] == (0, 0)
    assert all((b[0] - a[0], b[1] - a[1]) in UNIT for a, b in zip(ys, ys[1:]))


def test_project_unknown_scheme(capsys, tmp_path):
    traj = tmp_path / "t.txt"
    traj.write_text("0 0 N\n")
    assert run(capsys, "project", "--trajectory", traj, "--scheme", "diagonal")[0] == 2


def test_accept_single_criterion(capsys):
    code, out, _ = run(capsys, "accept", "--only", "1")
    assert code == 0
    assert out.splitlines()[0].split()[:2] == ["[PASS]", "1."]
    assert out.splitlines()[-1] == "1/1 criteria passed"
