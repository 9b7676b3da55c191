import json

from fuhst.cli import main
from fuhst.detectors import load_state


def test_scenarios_lists_presets(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out
    assert all(f"s{k}" in out for k in range(1, 9))


def test_run_writes_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("preset: s4\nrounds: 3\n")
    assert main(["run", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path / "o"),
                 "--coord-log"]) == 0
    assert "seed=2" in capsys.readouterr().out
    payload = json.loads((tmp_path / "o" / "run.json").read_text())
    assert payload["config"]["seed"] == 2
    assert (tmp_path / "o" / "rounds.csv").exists()
    assert (tmp_path / "o" / "coordination.ndjson").exists()


def test_run_multiple_seeds(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("preset: s1\nrounds: 2\n")
    assert main(["run", "--config", str(cfg), "--seeds", "2", "--mitigation", "na",
                 "--out", str(tmp_path)]) == 0
    assert "mean acc=" in capsys.readouterr().out
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["seeds"] == [0, 1]
    assert (tmp_path / "seed_1" / "run.json").exists()


def test_pretrain_writes_state(tmp_path):
    path = tmp_path / "state.npz"
    assert main(["pretrain", "--out", str(path), "--seed", "1"]) == 0
    det = load_state(path)
    assert det.name == "fuhst" and det.ensemble.ref_mass.any()


def test_sweep(tmp_path, capsys):
    grid = tmp_path / "g.yaml"
    grid.write_text("ranges:\n  n_trees: [60]\n  depth: [3]\n  tau: [0.55, 0.7]\n  window: [120]\n"
                    "seeds: [0]\nbase:\n  rounds: 3\n")
    assert main(["sweep", "--grid", str(grid), "--out", str(tmp_path / "s")]) == 0
    assert "best" in capsys.readouterr().out
    rows = (tmp_path / "s" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1 + 2
    assert (tmp_path / "s" / "best.yaml").exists()


def test_configuration_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("nodes: 3\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["run", "--preset", "s1", "--config", str(cfg)]) == 2
