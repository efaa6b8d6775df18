"""CLI surface: subcommands, exit codes, formats, config resolution."""

import json

import pytest

from dismed.cli import main

from fixture_defs import fixture_dict


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_decide_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "decide", str(fixtures_dir / "all_satisfied_buyer.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["buyer_disintermediates"] == "Satisfied"
    assert payload["scenario"] == "all_satisfied_buyer"
    assert payload["reports"]["buyer"]["verdicts"][4]["id"] == "B5"


def test_validate_ok(capsys, fixtures_dir):
    code, out, _ = run(capsys, "validate", str(fixtures_dir / "all_three_satisfied.json"))
    assert code == 0
    assert json.loads(out)["ok"] is True


def test_validate_bad_commission(capsys, fixtures_dir):
    code, out, err = run(capsys, "validate", str(fixtures_dir / "bad_c.json"))
    assert code == 2
    assert "CommissionOutOfRange" in err
    assert json.loads(out)["ok"] is False


def test_decide_bad_scenario_exits_2(capsys, fixtures_dir):
    code, _, err = run(capsys, "decide", str(fixtures_dir / "bad_c.json"))
    assert code == 2
    assert "CommissionOutOfRange" in err


def test_unknown_field_exits_2(capsys, tmp_path):
    data = fixture_dict("x")
    data["zeta"] = 3
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "decide", str(path))
    assert code == 2 and "zeta" in err


def test_conditions_csv(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "report.csv"
    code, _, _ = run(capsys, "conditions", str(fixtures_dir / "all_three_satisfied.json"),
                     "--set", "seller", "--format", "csv", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0].startswith("id,status,lhs_lower")
    assert len(lines) == 1 + 18
    assert lines[1].startswith("S1,Satisfied")


def test_optimize_and_exit_codes(capsys, fixtures_dir, tmp_path):
    code, out, _ = run(capsys, "optimize", str(fixtures_dir / "broker_opt.json"),
                       "--bounds", str(fixtures_dir / "bounds_bi.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["feasible"] is True
    assert abs(payload["decision"]["B_i"] - 2.0) < 1e-3

    code, out, err = run(capsys, "optimize", str(fixtures_dir / "broker_opt.json"),
                         "--bounds", str(fixtures_dir / "bounds_infeasible.json"))
    assert code == 3
    assert json.loads(out)["feasible"] is False
    assert "infeasible" in err


def test_pareto_csv_and_infeasible(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "front.csv"
    code, _, _ = run(capsys, "pareto", str(fixtures_dir / "broker_opt.json"),
                     "--bounds", str(fixtures_dir / "bounds_bi.json"),
                     "--points", "5", "--format", "csv", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == "cost,capital,B_b,B_s,B_i,B_n,state"
    assert len(lines) > 1

    code, _, _ = run(capsys, "pareto", str(fixtures_dir / "broker_opt.json"),
                     "--bounds", str(fixtures_dir / "bounds_infeasible.json"),
                     "--format", "csv", "--out", str(out_path))
    assert code == 3
    assert out_path.read_text() == "cost,capital,B_b,B_s,B_i,B_n,state\n"


def test_sweep_deterministic_bytes(capsys, fixtures_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out_path in (a, b):
        code, _, _ = run(capsys, "sweep", str(fixtures_dir / "all_satisfied_buyer.json"),
                         "--dist", str(fixtures_dir / "point_dist.json"),
                         "-n", "5", "--seed", "7", "--out", str(out_path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    payload = json.loads(a.read_text())
    assert payload["per_set"]["buyer"]["satisfied_rate"] == 1.0


def test_sweep_csv_rows(capsys, fixtures_dir, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", str(fixtures_dir / "all_satisfied_buyer.json"),
                     "--dist", str(fixtures_dir / "rho_dist.json"),
                     "-n", "8", "--seed", "1", "--format", "csv",
                     "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == "id,frequency,indeterminate_rate"
    assert len(lines) == 1 + 44


def test_sensitivity_cli(capsys, fixtures_dir):
    code, out, _ = run(capsys, "sensitivity", str(fixtures_dir / "all_three_satisfied.json"),
                       "--condition", "B5", "--param", "psi_b")
    assert code == 0
    payload = json.loads(out)
    assert payload["condition"] == "B5"
    assert payload["margin"] == pytest.approx(0.1)


def test_sensitivity_indeterminate_exits_4(capsys, fixtures_dir, tmp_path):
    data = fixture_dict("bare")
    data["responses"] = []
    path = tmp_path / "bare.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "sensitivity", str(path),
                       "--condition", "B8", "--param", "psi_bi")
    assert code == 4
    assert "B8" in err


def test_config_file_and_env(capsys, fixtures_dir, tmp_path, monkeypatch):
    code, out, _ = run(capsys, "decide", str(fixtures_dir / "all_three_satisfied.json"),
                       "--config", str(fixtures_dir / "config_quorum.json"))
    assert code == 0
    assert json.loads(out)["reports"]["buyer"]["config"]["aggregation"] == "quorum"

    monkeypatch.setenv("DISMED_CONFIG", str(fixtures_dir / "config_quorum.json"))
    code, out, _ = run(capsys, "decide", str(fixtures_dir / "all_three_satisfied.json"))
    assert json.loads(out)["reports"]["buyer"]["config"]["aggregation"] == "quorum"

    other = tmp_path / "conj.json"
    other.write_text(json.dumps({"aggregation": "conjunction"}))
    code, out, _ = run(capsys, "decide", str(fixtures_dir / "all_three_satisfied.json"),
                       "--config", str(other))
    assert json.loads(out)["reports"]["buyer"]["config"]["aggregation"] == "conjunction"


def test_bad_config_exits_2(capsys, fixtures_dir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"aggregation": "sometimes"}))
    code, _, err = run(capsys, "decide", str(fixtures_dir / "all_three_satisfied.json"),
                       "--config", str(bad))
    assert code == 2 and "aggregation" in err


def test_decide_csv_format(capsys, fixtures_dir):
    code, out, _ = run(capsys, "decide", str(fixtures_dir / "all_three_satisfied.json"),
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "set,id,status"
    assert "buyer,aggregate,Satisfied" in lines
    assert len(lines) == 1 + 3 + 44


def test_validate_csv_format(capsys, fixtures_dir):
    code, out, _ = run(capsys, "validate", str(fixtures_dir / "bad_c.json"),
                       "--format", "csv")
    assert code == 2
    lines = out.strip().splitlines()
    assert lines[0] == "code,message"
    assert lines[1].startswith("CommissionOutOfRange")
