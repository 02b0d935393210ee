"""Command-line interface: exit codes, file formats, determinism."""

import json

import numpy as np
from fletcher_penalty.cli import main


def run_cli(args):
    return main(args)


def test_solve_writes_trace_and_exits_zero(tmp_path):
    out = tmp_path / "trace.json"
    code = run_cli(
        [
            "solve", "--problem", "rayleigh", "--n", "10", "--eps1", "1e-5",
            "--eps2", "1e-4", "--beta", "10", "--seed", "1", "--output-path", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"config", "records", "final_x", "certificate", "termination"}
    assert payload["termination"] == "converged"
    assert payload["records"][-1]["kind"] == "terminal"
    assert len(payload["final_x"]) == 10


def test_unknown_problem_exits_64(tmp_path):
    assert run_cli(["solve", "--problem", "nosuch", "--output-path", str(tmp_path / "x.json")]) == 64


def test_eps1_above_half_radius_exits_64(tmp_path, capsys):
    code = run_cli(
        ["solve", "--problem", "sphere", "--eps1", "0.3", "--output-path", str(tmp_path / "x.json")]
    )
    assert code == 64
    assert "eps1 <= R/2" in capsys.readouterr().err


def test_max_iters_exits_two(tmp_path):
    code = run_cli(
        [
            "solve", "--problem", "rayleigh", "--n", "10", "--eps1", "1e-9",
            "--beta", "10", "--seed", "1", "--max-iters", "3",
            "--output-path", str(tmp_path / "t.json"),
        ]
    )
    assert code == 2


def test_sweep_monotone_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run_cli(
        [
            "sweep", "--problem", "rayleigh", "--n", "10", "--beta", "10",
            "--seed", "1", "--eps-list", "1e-2,1e-3,1e-4", "--output-path", str(out),
        ]
    )
    assert code == 0
    raw = out.read_bytes().decode()
    lines = raw.split("\r\n")  # RFC-4180 line endings
    assert lines[-1] == ""
    header = lines[0].split(",")
    assert header == [
        "eps", "iters_total", "iters_grad", "iters_eigen", "final_h_norm",
        "final_grad_norm", "final_min_eig", "g_final", "termination",
    ]
    rows = [ln.split(",") for ln in lines[1:-1]]
    assert len(rows) == 3
    eps = [float(r[0]) for r in rows]
    assert eps == sorted(eps, reverse=True)
    iters = [int(r[1]) for r in rows]
    assert iters == sorted(iters)  # nondecreasing as eps shrinks
    assert all(r[-1] == "" for r in rows)  # all converged


def test_sweep_single_eps_matches_solve(tmp_path):
    out_csv = tmp_path / "one.csv"
    out_json = tmp_path / "one.json"
    assert run_cli(
        [
            "sweep", "--problem", "rayleigh", "--n", "10", "--beta", "10",
            "--seed", "1", "--eps-list", "1e-3", "--output-path", str(out_csv),
        ]
    ) == 0
    assert run_cli(
        [
            "solve", "--problem", "rayleigh", "--n", "10", "--beta", "10",
            "--seed", "1", "--eps1", "1e-3", "--output-path", str(out_json),
        ]
    ) == 0
    row = out_csv.read_bytes().decode().split("\r\n")[1].split(",")
    trace = json.loads(out_json.read_text())
    solo_iters = sum(1 for r in trace["records"] if r["kind"] != "terminal")
    assert int(row[1]) == solo_iters


def test_sweep_empty_list_exits_64(tmp_path):
    assert run_cli(
        ["sweep", "--problem", "rayleigh", "--eps-list", "", "--output-path", str(tmp_path / "s.csv")]
    ) == 64


def test_plateau_command(tmp_path, capsys):
    out = tmp_path / "p.json"
    code = run_cli(
        [
            "plateau", "--problem", "stiefel", "--n", "8", "--p", "2", "--seed", "3",
            "--eps1", "1e-4", "--eps2", "1e-3", "--beta0", "1e-3", "--gamma", "2",
            "--lp0", "50", "--output-path", str(out),
        ]
    )
    assert code == 0
    assert "plateaus=" in capsys.readouterr().err
    payload = json.loads(out.read_text())
    assert "plateaus" in payload
    assert payload["termination"] == "converged"


def test_restore_command(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli(
        [
            "restore", "--problem", "stiefel", "--n", "8", "--p", "3", "--seed", "3",
            "--t-end", "2", "--perturb", "0.3", "--output-path", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    decay = payload["decay_log"]
    assert decay[0][0] == 0.0
    assert decay[-1][1] <= decay[0][1]


def test_check_command(tmp_path):
    out = tmp_path / "c.json"
    code = run_cli(["check", "--problem", "sphere", "--seeds", "10", "--output-path", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert all(r["pass"] for r in payload)


def test_byte_determinism_same_runspec(tmp_path):
    args = [
        "solve", "--problem", "rayleigh", "--n", "10", "--eps1", "1e-5",
        "--eps2", "1e-4", "--beta", "10", "--seed", "1",
    ]
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert run_cli(args + ["--output-path", str(out1)]) == 0
    assert run_cli(args + ["--output-path", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    sweep_args = [
        "sweep", "--problem", "rayleigh", "--n", "8", "--beta", "10",
        "--seed", "2", "--eps-list", "1e-2,1e-3",
    ]
    csv1 = tmp_path / "a.csv"
    csv2 = tmp_path / "b.csv"
    assert run_cli(sweep_args + ["--output-path", str(csv1)]) == 0
    assert run_cli(sweep_args + ["--output-path", str(csv2)]) == 0
    assert csv1.read_bytes() == csv2.read_bytes()


def test_env_seed_override(tmp_path, monkeypatch):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    base = ["solve", "--problem", "rayleigh", "--n", "8", "--beta", "10", "--eps1", "1e-4"]
    monkeypatch.setenv("FLETCHER_SEED", "7")
    assert run_cli(base + ["--seed", "1", "--output-path", str(out1)]) == 0
    monkeypatch.delenv("FLETCHER_SEED")
    assert run_cli(base + ["--seed", "7", "--output-path", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_spec_file_with_flag_override(tmp_path):
    spec = {
        "problem_id": "rayleigh",
        "problem_params": {"n": 10, "seed": 1},
        "solver": {"eps1": 1e-3, "beta": 10.0},
        "output_path": str(tmp_path / "from_spec.json"),
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    assert run_cli(["solve", "--spec", str(spec_path)]) == 0
    assert (tmp_path / "from_spec.json").exists()
    # flag overrides the file value
    out2 = tmp_path / "override.json"
    assert run_cli(["solve", "--spec", str(spec_path), "--output-path", str(out2)]) == 0
    a = json.loads((tmp_path / "from_spec.json").read_text())
    b = json.loads(out2.read_text())
    assert a == b


def test_rayleigh_matrix_csv(tmp_path):
    mat = tmp_path / "mat.csv"
    a = np.diag([1.0, 2.0, 3.0])
    np.savetxt(mat, a, delimiter=",")
    out = tmp_path / "m.json"
    code = run_cli(
        [
            "solve", "--problem", "rayleigh", "--matrix", str(mat), "--beta", "10",
            "--eps1", "1e-4", "--seed", "0", "--output-path", str(out),
        ]
    )
    assert code == 0
    assert len(json.loads(out.read_text())["final_x"]) == 3
