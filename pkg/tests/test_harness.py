"""Experiment-runner tests: config validation, aggregation, determinism."""

import json
from pathlib import Path

import numpy as np
import pytest

from duelband.bounds import BoundParams, high_prob_regret_curve
from duelband.errors import ConfigError
from duelband.harness import (
    aggregate,
    collect_runs,
    config_from_dict,
    emit_plot_data,
    load_config,
    resolve_matrix,
    run_experiment,
)
from duelband.preference import gaps, generate_planted, save_matrix
from duelband.rucb import log_checkpoints


def base_config(**overrides):
    d = {
        "matrix": {"generator": "planted", "k": 4, "delta_min": 0.1,
                   "delta_max": 0.3, "seed": 7},
        "algorithm": "rucb",
        "alpha": 1.0,
        "runs": 4,
        "horizon": 800,
        "seed_base": 50,
        "checkpoints": [10, 100, 800],
    }
    d.update(overrides)
    return d


# ---------------------------------------------------------------------------
# Config parsing


def test_config_roundtrip_and_defaults():
    cfg = config_from_dict(base_config())
    assert cfg.algorithm == "rucb"
    assert cfg.checkpoints == (10, 100, 800)
    assert cfg.record == "checkpoints"
    assert cfg.workers == 1
    assert cfg.output_dir is None
    assert cfg.raw["seed_base"] == 50


def test_config_checkpoint_count_is_log_spaced():
    cfg = config_from_dict(base_config(checkpoints=12))
    assert cfg.checkpoints == log_checkpoints(800, count=12)
    cfg = config_from_dict({k: v for k, v in base_config().items()
                            if k != "checkpoints"})
    assert cfg.checkpoints == log_checkpoints(800, count=20)


@pytest.mark.parametrize("patch", [
    {"algorithm": "savage"},
    {"runs": 0},
    {"horizon": 0},
    {"alpha": None},
    {"alpha": 0.5},
    {"checkpoints": []},
    {"checkpoints": [0, 10]},
    {"checkpoints": [10, 10]},
    {"checkpoints": [10, 801]},
    {"checkpoints": [10.5]},
    {"record": "everything"},
    {"audit_delta": 1.5},
    {"audit_alpha": 1.0},            # audit_alpha without audit_delta
    {"workers": 0},
    {"matrix": {"generator": "planted", "k": 4}},
    {"matrix": {"path": "m.csv", "generator": "cycle"}},
    {"matrix": "m.csv"},
    {"typo_field": 1},
])
def test_config_rejects_bad_fields(patch):
    with pytest.raises(ConfigError):
        config_from_dict(base_config(**patch))


def test_config_requires_all_core_fields():
    for missing in ("matrix", "algorithm", "runs", "horizon", "seed_base"):
        d = {k: v for k, v in base_config().items() if k != missing}
        with pytest.raises(ConfigError):
            config_from_dict(d)


def test_config_random_pairing_rules():
    d = base_config(algorithm="random_pairing")
    del d["alpha"]
    cfg = config_from_dict(d)
    assert cfg.alpha is None
    with pytest.raises(ConfigError):
        config_from_dict(base_config(algorithm="random_pairing"))
    with pytest.raises(ConfigError):
        config_from_dict({**d, "audit_delta": 0.25})
    ok = config_from_dict({**d, "audit_delta": 0.25, "audit_alpha": 1.0})
    assert ok.audit_alpha == 1.0


def test_config_step_log_limit():
    big = base_config(horizon=2_000_000, record="steps",
                      checkpoints=[2_000_000])
    with pytest.raises(ConfigError):
        config_from_dict(big)
    cfg = config_from_dict({**big, "force_step_log": True})
    assert cfg.record == "steps"
    small = config_from_dict(base_config(record="steps"))
    assert small.record == "steps"


def test_load_config_resolves_relative_paths(tmp_path):
    m = generate_planted(3, 0.2, 0.3, seed=1)
    save_matrix(m, tmp_path / "m.csv")
    d = base_config(matrix={"path": "m.csv"}, output_dir="results")
    (tmp_path / "cfg.json").write_text(json.dumps(d))
    cfg = load_config(tmp_path / "cfg.json")
    assert Path(cfg.matrix_source["path"]) == tmp_path / "m.csv"
    assert Path(cfg.output_dir) == tmp_path / "results"
    assert np.array_equal(resolve_matrix(cfg).p, m.p)


def test_load_config_rejects_bad_json(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")


# ---------------------------------------------------------------------------
# Aggregation


def test_single_run_collapses_mean_min_max():
    cfg = config_from_dict(base_config(runs=1))
    agg = run_experiment(cfg)
    assert np.array_equal(agg.mean_regret, agg.min_regret)
    assert np.array_equal(agg.mean_regret, agg.max_regret)


def test_aggregate_invariants_and_accuracy_range():
    cfg = config_from_dict(base_config(runs=6, audit_delta=0.25))
    agg = run_experiment(cfg)
    assert np.all(agg.min_regret <= agg.mean_regret)
    assert np.all(agg.mean_regret <= agg.max_regret)
    assert np.all((agg.accuracy >= 0.0) & (agg.accuracy <= 1.0))
    assert agg.winner == 0
    assert agg.violated_runs is not None
    # Cumulative regret never decreases along any single run.
    matrix = resolve_matrix(cfg)
    for tr in collect_runs(cfg, matrix):
        assert np.all(np.diff(tr.checkpoints.cum_regret) >= 0.0)


def test_aggregate_rejects_mismatched_schedules():
    cfg = config_from_dict(base_config(runs=2))
    matrix = resolve_matrix(cfg)
    traces = collect_runs(cfg, matrix)
    other = config_from_dict(base_config(runs=1, checkpoints=[5, 800]))
    odd = collect_runs(other, matrix)
    with pytest.raises(ValueError):
        aggregate(traces + odd, winner=0)
    with pytest.raises(ValueError):
        aggregate([], winner=0)


def test_random_pairing_experiment_runs():
    d = base_config(algorithm="random_pairing", runs=3)
    del d["alpha"]
    agg = run_experiment(config_from_dict(d))
    assert agg.runs == 3
    assert agg.violated_runs is None


# ---------------------------------------------------------------------------
# Persistence and determinism


def _run_into(tmp_path, name, extra=None):
    root = tmp_path / name
    root.mkdir()
    d = base_config(output_dir="out", **(extra or {}))
    (root / "cfg.json").write_text(json.dumps(d, indent=2, sort_keys=True))
    run_experiment(load_config(root / "cfg.json"))
    return root / "out"


def test_rerun_reproduces_every_byte(tmp_path):
    a = _run_into(tmp_path, "a")
    b = _run_into(tmp_path, "b")
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    assert any(f.name == "run_0003.csv" for f in files_a)
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_worker_count_does_not_change_results(tmp_path):
    a = _run_into(tmp_path, "serial")
    b = _run_into(tmp_path, "threaded", extra={"workers": 3})
    for rel in ("aggregate.csv", "aggregate.json", "matrix.csv",
                "traces/run_0000.csv", "traces/run_0003.json"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_persisted_layout(tmp_path):
    out = _run_into(tmp_path, "layout", extra={"runs": 2})
    assert json.loads((out / "config.json").read_text())["runs"] == 2
    agg = json.loads((out / "aggregate.json").read_text())
    assert agg["runs"] == 2 and agg["winner"] == 0
    lines = (out / "aggregate.csv").read_text().splitlines()
    assert lines[0] == "t,mean_regret,min_regret,max_regret,accuracy"
    assert len(lines) == 4
    side = json.loads((out / "traces" / "run_0001.json").read_text())
    assert side["seed"] == 51


# ---------------------------------------------------------------------------
# Plot data


def test_emit_plot_data_passes_overlays_through(tmp_path):
    cfg = config_from_dict(base_config(runs=2, alpha=2.0))
    agg = run_experiment(cfg)
    g = gaps(resolve_matrix(cfg))
    params = BoundParams(alpha=2.0, k=4, delta=0.1, gaps=g)
    curve = high_prob_regret_curve(params, agg.ts)
    regret_path, accuracy_path = emit_plot_data(
        agg, {"high_prob_bound": curve}, tmp_path
    )
    lines = regret_path.read_text().splitlines()
    assert lines[0] == "t,mean_regret,min_regret,max_regret,high_prob_bound"
    assert len(lines) == agg.ts.size + 1
    got = np.array([float(l.split(",")[4]) for l in lines[1:]])
    assert np.array_equal(got, curve)
    acc_lines = accuracy_path.read_text().splitlines()
    assert acc_lines[0] == "t,accuracy"
    assert all(int(l.split(",")[0]) >= 1 for l in acc_lines[1:])


def test_emit_plot_data_without_overlays(tmp_path):
    cfg = config_from_dict(base_config(runs=1))
    agg = run_experiment(cfg)
    regret_path, accuracy_path = emit_plot_data(agg, {}, tmp_path)
    assert regret_path.exists() and accuracy_path.exists()
    assert regret_path.read_text().splitlines()[0] == \
        "t,mean_regret,min_regret,max_regret"


def test_emit_plot_data_validates_overlays(tmp_path):
    cfg = config_from_dict(base_config(runs=1))
    agg = run_experiment(cfg)
    with pytest.raises(ValueError):
        emit_plot_data(agg, {"bad": np.zeros(agg.ts.size + 1)}, tmp_path)
    with pytest.raises(ValueError):
        emit_plot_data(agg, {"has,comma": np.zeros(agg.ts.size)}, tmp_path)
