import json
import math

import pytest

from packbound.cli import main, parse_angle, parse_generator


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_angle():
    assert parse_angle("60deg") == pytest.approx(math.pi / 3)
    assert parse_angle("1.5") == 1.5
    assert parse_angle(" 90deg ") == pytest.approx(math.pi / 2)


def test_parse_generator():
    assert parse_generator("cycle:5").n == 5
    assert parse_generator("petersen").n == 10
    assert parse_generator("code:2,4,3").n == 16
    assert parse_generator("cap:4,45deg,45deg").n == 8


def test_bound_cycle_level2(capsys):
    code, out, _ = run(capsys, "bound", "--gen", "cycle:5",
                       "--method", "las", "--t", "2", "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert rec["bound"] == pytest.approx(2.0, abs=1e-6)
    assert rec["status"] == "optimal"
    assert rec["level"] == 2
    assert rec["certificate_digest"]


def test_three_point_warns_without_transitive_flag(capsys):
    code, out, _ = run(capsys, "bound", "--gen", "petersen",
                       "--method", "three-point", "--t", "1")
    assert code == 0
    assert "bounds 1+α(Gᵉ) only" in out
    code, out, _ = run(capsys, "bound", "--gen", "petersen",
                       "--method", "three-point", "--t", "1",
                       "--assume-transitive")
    assert code == 0
    assert "only" not in out


def test_delsarte_dimension8(capsys):
    code, out, _ = run(capsys, "bound", "--delsarte", "--n", "8",
                       "--theta", "60deg", "--degree", "6",
                       "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert rec["status"] == "certified"
    assert 240.0 <= rec["bound"] <= 240.001


def test_json_deterministic_modulo_wall_time(capsys):
    args = ("bound", "--gen", "petersen", "--method", "theta-prime",
            "--format", "json")
    _, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    a, b = json.loads(out1), json.loads(out2)
    a.pop("wall_time"), b.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_subgraph_generator_is_labeled(capsys):
    code, out, _ = run(capsys, "bound", "--gen", "circle:9,0.8",
                       "--method", "las", "--t", "1")
    assert code == 0
    assert "subgraph bound" in out


def test_with_alpha_sandwich_line(capsys):
    code, out, _ = run(capsys, "bound", "--gen", "cycle:7",
                       "--method", "las", "--t", "3", "--with-alpha")
    assert code == 0
    assert "α ≤" in out


def test_alpha_subcommand(capsys):
    code, out, _ = run(capsys, "alpha", "--gen", "petersen",
                       "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert rec["bound"] == 4.0
    assert rec["status"] == "exact"
    assert len(rec["witness"]) == 4


def test_alpha_from_file(tmp_path, capsys):
    p = tmp_path / "g.txt"
    p.write_text("n=4\nedge 0 1\nedge 2 3\n")
    code, out, _ = run(capsys, "alpha", "--file", str(p), "--format", "json")
    assert code == 0
    assert json.loads(out)["bound"] == 2.0


def test_export_sdpa(tmp_path, capsys):
    out_path = tmp_path / "prog.dat-s"
    code, _, _ = run(capsys, "export-sdpa", "--gen", "cycle:5",
                     "--t", "1", "--output", str(out_path))
    assert code == 0
    from packbound import parse_sdpa, solve
    problem = parse_sdpa(out_path.read_text())
    sol = solve(problem)
    assert sol.dual_objective == pytest.approx(math.sqrt(5.0), abs=1e-6)


def test_gen_list(capsys):
    code, out, _ = run(capsys, "gen-list")
    assert code == 0
    assert "cycle:n" in out
    assert "subgraph bound" in out


def test_exit_code_config_error(capsys):
    code, _, err = run(capsys, "bound", "--gen", "nosuch:1")
    assert code == 2
    assert "error" in err
    code, _, _ = run(capsys, "bound")  # no instance at all
    assert code == 2
    code, _, _ = run(capsys, "bound", "--gen", "cycle:5", "--file", "x")
    assert code == 2


def test_exit_code_cap_exceeded(capsys):
    code, _, err = run(capsys, "bound", "--gen", "cycle:5",
                       "--method", "las", "--t", "2", "--cap", "3")
    assert code == 3
    assert "cap" in err
    # message names the offending cardinality so users can lower t
    assert any(ch.isdigit() for ch in err)


def test_jobs_fanout(capsys):
    code, out, _ = run(capsys, "bound", "--gen", "cycle:4",
                       "--gen", "cycle:5", "--jobs", "2",
                       "--method", "theta-prime", "--format", "json")
    assert code == 0
    recs = json.loads(out)
    assert len(recs) == 2
    assert recs[0]["graph"] == "cycle:4"
    assert recs[1]["bound"] == pytest.approx(math.sqrt(5.0), abs=1e-6)
