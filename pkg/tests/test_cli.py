import pytest

from mapfe.cli import main

from conftest import THREE_FLOOR_STRIP

SCEN = "1 0 0 2 2 0\n3 0 0 2 0 0\n"


@pytest.fixture
def golden_files(tmp_path):
    map_path = tmp_path / "toy.map"
    scen_path = tmp_path / "toy.scen"
    map_path.write_text(THREE_FLOOR_STRIP)
    scen_path.write_text(SCEN)
    return map_path, scen_path


def test_solve_prints_cost_paths_and_stats(golden_files, capsys):
    map_path, scen_path = golden_files
    code = main(["solve", "--map", str(map_path), "--scen", str(scen_path)])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "soc 9"
    assert lines[1].startswith("agent 0: (1,0,0)@0")
    assert lines[2].startswith("agent 1: (3,0,0)@0")
    assert lines[3].startswith("stats expanded=")


def test_solve_validate_round_trip(golden_files, tmp_path, capsys):
    map_path, scen_path = golden_files
    plan_path = tmp_path / "plan.txt"
    assert main(["solve", "--map", str(map_path), "--scen", str(scen_path),
                 "--out", str(plan_path)]) == 0
    capsys.readouterr()
    code = main(["validate", "--map", str(map_path), "--scen", str(scen_path),
                 "--plan", str(plan_path)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "OK"


def test_validate_reports_conflicts(golden_files, tmp_path, capsys):
    map_path, scen_path = golden_files
    # both agents ride immediately: elevator conflict
    plan_path = tmp_path / "bad.txt"
    plan_path.write_text(
        "agent 0: (1,0,0)@0 (1,1,0)@1 (2,1,0)@2 (2,2,0)@3\n"
        "agent 1: (3,0,0)@0 (3,1,0)@1 (2,1,0)@2 (2,0,0)@3\n")
    code = main(["validate", "--map", str(map_path), "--scen", str(scen_path),
                 "--plan", str(plan_path)])
    out = capsys.readouterr().out
    assert code == 1
    assert "boarding" in out or "Vertex" in out


def test_validate_rejects_structurally_broken_plan(golden_files, tmp_path, capsys):
    map_path, scen_path = golden_files
    plan_path = tmp_path / "broken.txt"
    plan_path.write_text("agent 0: (1,0,0)@0 (1,2,0)@1\nagent 1: (3,0,0)@0\n")
    code = main(["validate", "--map", str(map_path), "--scen", str(scen_path),
                 "--plan", str(plan_path)])
    assert code == 1
    assert "invalid" in capsys.readouterr().out


def test_variant_flags_yield_identical_cost_line(golden_files, capsys):
    map_path, scen_path = golden_files
    lines = []
    for flags in (["--ec", "on", "--mdde", "on"], ["--ec", "off", "--mdde", "off"]):
        assert main(["solve", "--map", str(map_path), "--scen", str(scen_path)] + flags) == 0
        lines.append(capsys.readouterr().out.splitlines()[0])
    assert lines[0] == lines[1] == "soc 9"


def test_oracle_subcommand(golden_files, capsys):
    map_path, scen_path = golden_files
    assert main(["oracle", "--map", str(map_path), "--scen", str(scen_path)]) == 0
    assert capsys.readouterr().out.strip() == "soc 9"


def test_gen_solve_pipeline(tmp_path, capsys):
    map_path = tmp_path / "g.map"
    scen_path = tmp_path / "g.scen"
    assert main(["gen", "--size", "6", "--floors", "2", "--elevators", "2",
                 "--tfloor", "2", "--agents", "3", "--seed", "5",
                 "--out-map", str(map_path), "--out-scen", str(scen_path)]) == 0
    capsys.readouterr()
    assert main(["solve", "--map", str(map_path), "--scen", str(scen_path)]) == 0
    assert capsys.readouterr().out.startswith("soc ")


def test_bench_subcommand_writes_csv(tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    out = tmp_path / "out.csv"
    cfg.write_text("experiment = mini\nsize = 6\nfloors = 2\nelevators = 2\n"
                   "tfloor = 2\nagents = 2\ninstances = 1\ntime_limit = 10\n"
                   "variants = cbs+ec\n")
    assert main(["bench", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("experiment,variant,N,floors,tfloor,seed,solved,soc")
    assert len(lines) == 2
    assert "N=2" in capsys.readouterr().out


def test_timeout_exit_code(tmp_path, capsys):
    map_path = tmp_path / "swap.map"
    scen_path = tmp_path / "swap.scen"
    map_path.write_text("type mapf-e\nfloors 1\nheight 1\nwidth 2\ntfloor 1\n..\n")
    scen_path.write_text("1 0 0 1 1 0\n1 1 0 1 0 0\n")
    code = main(["solve", "--map", str(map_path), "--scen", str(scen_path),
                 "--time-limit", "0.2"])
    assert code == 2
    assert capsys.readouterr().out.strip() == "timeout"


def test_infeasible_exit_code(tmp_path, capsys):
    map_path = tmp_path / "wall.map"
    scen_path = tmp_path / "wall.scen"
    map_path.write_text("type mapf-e\nfloors 1\nheight 1\nwidth 3\ntfloor 1\n.@.\n")
    scen_path.write_text("1 0 0 1 2 0\n")
    assert main(["solve", "--map", str(map_path), "--scen", str(scen_path)]) == 1
    capsys.readouterr()
    assert main(["oracle", "--map", str(map_path), "--scen", str(scen_path)]) == 1


def test_usage_errors_exit_3(capsys):
    assert main(["solve", "--map"]) == 3
    assert main(["frobnicate"]) == 3
    assert main(["solve", "--map", "a", "--scen", "b", "--bogus"]) == 3
    err = capsys.readouterr().err
    assert "usage" in err


def test_unreadable_input_is_invalid(tmp_path, capsys):
    missing = tmp_path / "nope.map"
    assert main(["solve", "--map", str(missing), "--scen", str(missing)]) == 1
