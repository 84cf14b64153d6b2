import json
import subprocess
import sys

import pytest

from sbpwave.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_errors(out):
    fields = dict(part.split("=") for part in out.split())
    return float(fields["l2_error"]), float(fields["max_error"])


def test_solve_fourth_order_dirichlet(capsys):
    code, out, _ = run(["solve", "--kind", "dirichlet", "--order", "4", "--n", "101", "--tau-mult", "1.2", "--tf", "2"], capsys)
    assert code == 0
    l2, _ = parse_errors(out)
    assert l2 == pytest.approx(1.74e-3, rel=0.01)


def test_unsupported_order_is_config_error(capsys):
    code, _, err = run(["solve", "--kind", "dirichlet", "--order", "3", "--n", "51"], capsys)
    assert code == 1
    assert "UnsupportedOrder" in err


def test_courant_beyond_limit_is_numerical_failure(capsys):
    code, _, err = run(["solve", "--kind", "dirichlet", "--order", "6", "--tau-mult", "1.2", "--courant", "0.7"], capsys)
    assert code == 2
    assert "NonFiniteState" in err


def test_unstable_penalty_is_refused_as_config(capsys):
    code, _, err = run(["solve", "--kind", "dirichlet", "--order", "2", "--tau-mult", "0.8", "--tf", "0.01"], capsys)
    assert code == 1 and "UnstablePenalty" in err
    code, _, _ = run(
        ["solve", "--kind", "dirichlet", "--order", "2", "--tau-mult", "0.8", "--tf", "0.01", "--allow-unstable"], capsys
    )
    assert code == 0


def test_usage_errors(capsys):
    assert run([], capsys)[0] == 1
    code, _, err = run(["solve", "--bogus"], capsys)
    assert code == 1 and "UsageError" in err
    assert run(["converge"], capsys)[0] == 1
    assert run(["converge", "--preset", "table9"], capsys)[0] == 1


def test_check_operators(capsys, tmp_path):
    code, out, _ = run(["check-operators", "--dump", str(tmp_path)], capsys)
    assert code == 0
    assert "FAIL" not in out and out.count("PASS") >= 18
    dumps = sorted(p.name for p in tmp_path.iterdir())
    assert dumps == ["sbp_order2_n101.txt", "sbp_order4_n101.txt", "sbp_order6_n101.txt"]


def test_analyze_neumann_fourth_order(capsys):
    code, out, _ = run(["analyze", "--kind", "neumann", "--order", "4"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["rank"] == 3
    assert data["coupling"]["abs"] == pytest.approx(0.3095, abs=1e-3)
    assert data["membership"]["member"] is True
    assert data["prediction"]["overall"] == 4


def test_analyze_interface_and_dirichlet(capsys, tmp_path):
    path = tmp_path / "a.json"
    assert run(["analyze", "--kind", "interface", "--order", "2", "--tau-mult", "1.0", "--output", str(path)], capsys)[0] == 0
    data = json.loads(path.read_text())
    assert data["membership"]["member"] is False and data["prediction"]["overall"] == 1.5
    _, out, _ = run(["analyze", "--kind", "dirichlet", "--order", "6"], capsys)
    assert json.loads(out)["rank"] == 6


def test_converge_outputs_are_deterministic(capsys, tmp_path):
    argv = ["converge", "--kind", "dirichlet", "--order", "2", "--levels", "26,51", "--workers", "1"]
    paths = []
    for i in range(2):
        csv_path, json_path, md_path = (tmp_path / f"r{i}.{ext}" for ext in ("csv", "json", "md"))
        code, _, _ = run(argv + ["--csv", str(csv_path), "--json", str(json_path), "--markdown", str(md_path)], capsys)
        assert code == 0
        paths.append((csv_path, json_path, md_path))
    for a, b in zip(*paths):
        assert a.read_bytes() == b.read_bytes()
    lines = paths[0][0].read_text().splitlines()
    assert lines[1] == "N,h,l2_error,max_error,q_l2,q_max"
    assert len(lines) == 4
    data = json.loads(paths[0][1].read_text())
    assert data[0]["predicted_rate"] == 2.0
    assert "| 51 |" in paths[0][2].read_text()


def test_converge_csv_to_stdout(capsys):
    code, out, _ = run(["converge", "--kind", "neumann", "--order", "4", "--levels", "26,51", "--workers", "1"], capsys)
    assert code == 0 and "N,h,l2_error" in out


def test_converge_reports_failed_level(capsys):
    code, out, err = run(
        ["converge", "--kind", "dirichlet", "--order", "2", "--levels", "26,51", "--courant", "3", "--workers", "1"], capsys
    )
    assert code == 2 and "failed" in err
    assert out.count("\n") == 4


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "problem.json"
    cfg.write_text(json.dumps({"kind": "dirichlet", "order": 4, "n": 51, "tau_mult": 1.2, "tf": 2.0}))
    code, out, _ = run(["solve", "--config", str(cfg)], capsys)
    assert code == 0
    base = parse_errors(out)[0]
    assert base == pytest.approx(4.84e-2, rel=0.01)
    code, out, _ = run(["solve", "--config", str(cfg), "--n", "101"], capsys)
    assert parse_errors(out)[0] == pytest.approx(1.74e-3, rel=0.01)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "dirichlet", "colour": 3}))
    assert run(["solve", "--config", str(bad)], capsys)[0] == 1
    assert run(["solve", "--config", str(tmp_path / "missing.json")], capsys)[0] == 1


def test_solve_writes_snapshot_energy_and_summary(capsys, tmp_path):
    snap, energy, summary = tmp_path / "u.csv", tmp_path / "e.csv", tmp_path / "s.json"
    argv = ["solve", "--kind", "interface", "--order", "2", "--n", "26", "--tf", "0.1"]
    code, _, _ = run(argv + ["--output", str(snap), "--energy", str(energy), "--json", str(summary)], capsys)
    assert code == 0
    rows = snap.read_text().splitlines()
    assert rows[0] == "x,u,v,u_exact"
    assert len(rows) == 1 + 26 + 51
    e = energy.read_text().splitlines()
    assert e[0] == "t,energy" and len(e) == 2 + json.loads(summary.read_text())["steps"]
    data = json.loads(summary.read_text())
    assert data["problem"]["kind"] == "interface"


def test_solve_two_dimensional_snapshot(capsys, tmp_path):
    snap = tmp_path / "u.csv"
    code, _, _ = run(["solve", "--kind", "dirichlet2d", "--order", "2", "--n", "11", "--tf", "0.05", "--output", str(snap)], capsys)
    assert code == 0
    assert snap.read_text().splitlines()[0] == "x,y,u,v,u_exact"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sbpwave", "solve", "--order", "3"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "error[UnsupportedOrder]" in proc.stderr
