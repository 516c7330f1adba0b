"""Config-driven experiment batches.

A JSON config is a complete reproduction recipe: matrix source, algorithm,
alpha, run count, horizon, seed base, checkpoint schedule, output directory.
Every random quantity derives from ``seed_base + run_index``, aggregation is
a deterministic fold in run-index order whatever the worker scheduling did,
and no output file embeds a timestamp, so re-running a config reproduces
every byte.

Config schema (all JSON):

    {
      "matrix":      {"path": "m.csv"}
                     | {"generator": "planted", "k": 5,
                        "delta_min": 0.1, "delta_max": 0.3, "seed": 7}
                     | {"generator": "cycle", "k": 5},
      "algorithm":   "rucb" | "random_pairing",
      "alpha":       1.0,            # rucb only; must exceed 1/2
      "runs":        100,
      "horizon":     100000,
      "seed_base":   0,
      "checkpoints": 20 | [10, 100, 1000],   # count (log-spaced) or list
      "record":      "checkpoints" | "steps",     # default "checkpoints"
      "force_step_log": false,   # allow "steps" past 10^6 steps
      "audit_delta": 0.25,       # optional coverage audit
      "audit_alpha": 1.0,        # audit bonus scale; required for the baseline
      "workers":     1,
      "output_dir":  "results/exp1"    # optional; omit to skip persistence
    }

Per-step records are refused above 10^6 steps unless ``force_step_log`` is
set; checkpoint records have no such limit.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .preference import (
    PreferenceMatrix,
    gaps,
    generate_cycle,
    generate_planted,
    load_matrix,
    matrix_sha256,
    save_matrix,
)
from .rucb import RunTrace, log_checkpoints, random_pairing_run, run, save_trace

__all__ = [
    "ExperimentConfig",
    "AggregateResult",
    "load_config",
    "resolve_matrix",
    "collect_runs",
    "aggregate",
    "run_experiment",
    "emit_plot_data",
]

STEP_LOG_LIMIT = 1_000_000

_KNOWN_KEYS = {
    "matrix", "algorithm", "alpha", "runs", "horizon", "seed_base",
    "checkpoints", "record", "force_step_log", "audit_delta", "audit_alpha",
    "workers", "output_dir",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; ``raw`` is the dict as parsed."""

    matrix_source: dict
    algorithm: str
    alpha: float | None
    runs: int
    horizon: int
    seed_base: int
    checkpoints: tuple
    record: str
    audit_delta: float | None
    audit_alpha: float | None
    workers: int
    output_dir: str | None
    raw: dict


def _need(d: dict, key: str, types, what: str):
    if key not in d:
        raise ConfigError(f"config is missing required field {key!r}")
    v = d[key]
    if not isinstance(v, types) or isinstance(v, bool):
        raise ConfigError(f"field {key!r} must be {what}, got {v!r}")
    return v


def _checkpoint_schedule(spec, horizon: int) -> tuple:
    if isinstance(spec, bool):
        raise ConfigError(f"'checkpoints' must be a count or a list, got {spec!r}")
    if isinstance(spec, int):
        if spec < 1:
            raise ConfigError(f"checkpoint count must be >= 1, got {spec}")
        return log_checkpoints(horizon, count=spec)
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise ConfigError("'checkpoints' list must be nonempty")
        out = []
        for x in spec:
            if not isinstance(x, int) or isinstance(x, bool):
                raise ConfigError(f"checkpoint entries must be ints, got {x!r}")
            out.append(x)
        if any(t < 1 or t > horizon for t in out):
            raise ConfigError(f"checkpoints must lie in [1, {horizon}]")
        if any(b <= a for a, b in zip(out, out[1:])):
            raise ConfigError("checkpoints must be strictly increasing")
        return tuple(out)
    raise ConfigError(f"'checkpoints' must be a count or a list, got {spec!r}")


def _validate_matrix_source(src, base_dir) -> dict:
    if not isinstance(src, dict):
        raise ConfigError(f"'matrix' must be an object, got {src!r}")
    if "path" in src:
        if set(src) != {"path"}:
            raise ConfigError("matrix path spec takes no other keys")
        path = src["path"]
        if not isinstance(path, str):
            raise ConfigError(f"matrix path must be a string, got {path!r}")
        resolved = str(Path(base_dir) / path) if base_dir is not None else path
        return {"path": resolved}
    gen = src.get("generator")
    if gen == "planted":
        want = {"generator", "k", "delta_min", "delta_max", "seed"}
        if set(src) != want:
            raise ConfigError(f"planted generator needs exactly keys {sorted(want)}")
        return dict(src)
    if gen == "cycle":
        if set(src) != {"generator", "k"}:
            raise ConfigError("cycle generator needs exactly keys ['generator', 'k']")
        return dict(src)
    raise ConfigError(
        "matrix source must be {'path': ...} or a 'planted'/'cycle' generator spec"
    )


def config_from_dict(d: dict, base_dir=None) -> ExperimentConfig:
    """Validate a parsed config dict; ``base_dir`` anchors relative paths."""
    if not isinstance(d, dict):
        raise ConfigError(f"config must be an object, got {type(d).__name__}")
    unknown = set(d) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    src = _validate_matrix_source(_need(d, "matrix", dict, "an object"), base_dir)
    algorithm = _need(d, "algorithm", str, "a string")
    if algorithm not in ("rucb", "random_pairing"):
        raise ConfigError(f"algorithm must be 'rucb' or 'random_pairing', "
                          f"got {algorithm!r}")
    runs = _need(d, "runs", int, "an int")
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    horizon = _need(d, "horizon", int, "an int")
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    seed_base = _need(d, "seed_base", int, "an int")

    alpha = d.get("alpha")
    if algorithm == "rucb":
        if not isinstance(alpha, (int, float)) or isinstance(alpha, bool):
            raise ConfigError("rucb needs a numeric 'alpha'")
        if not alpha > 0.5:
            raise ConfigError(f"alpha must exceed 1/2, got {alpha}")
        alpha = float(alpha)
    elif alpha is not None:
        raise ConfigError("random_pairing takes no 'alpha' (use 'audit_alpha')")

    checkpoints = _checkpoint_schedule(d.get("checkpoints", 20), horizon)

    record = d.get("record", "checkpoints")
    if record not in ("checkpoints", "steps"):
        raise ConfigError(f"record must be 'checkpoints' or 'steps', got {record!r}")
    force = d.get("force_step_log", False)
    if not isinstance(force, bool):
        raise ConfigError(f"force_step_log must be a boolean, got {force!r}")
    if record == "steps" and horizon > STEP_LOG_LIMIT and not force:
        raise ConfigError(
            f"per-step logs above {STEP_LOG_LIMIT} steps need force_step_log"
        )

    audit_delta = d.get("audit_delta")
    if audit_delta is not None:
        if not isinstance(audit_delta, (int, float)) or isinstance(audit_delta, bool):
            raise ConfigError(f"audit_delta must be numeric, got {audit_delta!r}")
        if not 0.0 < audit_delta <= 1.0:
            raise ConfigError(f"audit_delta must be in (0, 1], got {audit_delta}")
        audit_delta = float(audit_delta)
    audit_alpha = d.get("audit_alpha")
    if audit_alpha is not None:
        if audit_delta is None:
            raise ConfigError("audit_alpha given without audit_delta")
        if not isinstance(audit_alpha, (int, float)) or isinstance(audit_alpha, bool):
            raise ConfigError(f"audit_alpha must be numeric, got {audit_alpha!r}")
        if not audit_alpha > 0.5:
            raise ConfigError(f"audit_alpha must exceed 1/2, got {audit_alpha}")
        audit_alpha = float(audit_alpha)
    if algorithm == "random_pairing" and audit_delta is not None and audit_alpha is None:
        raise ConfigError("random_pairing audits need an explicit audit_alpha")

    workers = d.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ConfigError(f"workers must be an int >= 1, got {workers!r}")

    output_dir = d.get("output_dir")
    if output_dir is not None:
        if not isinstance(output_dir, str):
            raise ConfigError(f"output_dir must be a string, got {output_dir!r}")
        if base_dir is not None:
            output_dir = str(Path(base_dir) / output_dir)

    return ExperimentConfig(
        matrix_source=src,
        algorithm=algorithm,
        alpha=alpha,
        runs=runs,
        horizon=horizon,
        seed_base=seed_base,
        checkpoints=checkpoints,
        record=record,
        audit_delta=audit_delta,
        audit_alpha=audit_alpha,
        workers=workers,
        output_dir=output_dir,
        raw=dict(d),
    )


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON config file; relative paths resolve
    against the file's directory."""
    path = Path(path)
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return config_from_dict(d, base_dir=path.parent)


def resolve_matrix(cfg: ExperimentConfig) -> PreferenceMatrix:
    src = cfg.matrix_source
    if "path" in src:
        return load_matrix(src["path"])
    if src["generator"] == "planted":
        return generate_planted(
            src["k"], src["delta_min"], src["delta_max"], seed=src["seed"]
        )
    return generate_cycle(src["k"])


def collect_runs(cfg: ExperimentConfig, matrix: PreferenceMatrix) -> list:
    """Execute the configured runs and return traces in run-index order."""
    record_steps = cfg.record == "steps"

    def one(r: int) -> RunTrace:
        seed = cfg.seed_base + r
        if cfg.algorithm == "rucb":
            return run(
                matrix, cfg.alpha, cfg.horizon, seed,
                checkpoints=cfg.checkpoints, record_steps=record_steps,
                audit_delta=cfg.audit_delta, audit_alpha=cfg.audit_alpha,
            )
        return random_pairing_run(
            matrix, cfg.horizon, seed,
            checkpoints=cfg.checkpoints, record_steps=record_steps,
            audit_delta=cfg.audit_delta, audit_alpha=cfg.audit_alpha,
        )

    if cfg.workers > 1:
        # The compiled loops release the GIL, so threads buy real overlap;
        # map() hands results back in submission order regardless of which
        # worker finished first.
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(one, range(cfg.runs)))
    return [one(r) for r in range(cfg.runs)]


@dataclass(frozen=True)
class AggregateResult:
    """Across-run summaries at each checkpoint."""

    ts: np.ndarray
    mean_regret: np.ndarray
    min_regret: np.ndarray
    max_regret: np.ndarray
    accuracy: np.ndarray
    runs: int
    winner: int
    violated_runs: int | None

    def __post_init__(self):
        for a in (self.ts, self.mean_regret, self.min_regret,
                  self.max_regret, self.accuracy):
            a.setflags(write=False)


def aggregate(traces, winner: int) -> AggregateResult:
    """Fold traces (in the given order) into per-checkpoint summaries."""
    if not traces:
        raise ValueError("no traces to aggregate")
    ts = traces[0].checkpoints.ts
    for tr in traces[1:]:
        if not np.array_equal(tr.checkpoints.ts, ts):
            raise ValueError("traces disagree on the checkpoint schedule")
    regret = np.stack([tr.checkpoints.cum_regret for tr in traces])
    hits = np.stack([tr.checkpoints.best_arm == winner for tr in traces])
    audits = [tr.audit for tr in traces]
    violated = (sum(a.violated for a in audits)
                if all(a is not None for a in audits) else None)
    return AggregateResult(
        ts=ts.copy(),
        mean_regret=regret.mean(axis=0),
        min_regret=regret.min(axis=0),
        max_regret=regret.max(axis=0),
        accuracy=hits.mean(axis=0),
        runs=len(traces),
        winner=winner,
        violated_runs=violated,
    )


def _write_aggregate(agg: AggregateResult, matrix_hash: str, out: Path) -> None:
    with open(out / "aggregate.csv", "w") as fh:
        fh.write("t,mean_regret,min_regret,max_regret,accuracy\n")
        for r in range(agg.ts.size):
            fh.write(f"{int(agg.ts[r])},{float(agg.mean_regret[r])!r},"
                     f"{float(agg.min_regret[r])!r},{float(agg.max_regret[r])!r},"
                     f"{float(agg.accuracy[r])!r}\n")
    payload = {
        "runs": agg.runs,
        "winner": agg.winner,
        "violated_runs": agg.violated_runs,
        "matrix_sha256": matrix_hash,
        "ts": [int(t) for t in agg.ts],
        "mean_regret": [float(x) for x in agg.mean_regret],
        "min_regret": [float(x) for x in agg.min_regret],
        "max_regret": [float(x) for x in agg.max_regret],
        "accuracy": [float(x) for x in agg.accuracy],
    }
    with open(out / "aggregate.json", "w") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_experiment(cfg: ExperimentConfig) -> AggregateResult:
    """Run the whole batch; persist config echo, matrix, traces, aggregate.

    Persistence happens only when the config names an output directory.
    Running the same config twice writes identical bytes; changing only the
    worker count changes nothing beyond the echoed config itself.
    """
    matrix = resolve_matrix(cfg)
    winner = gaps(matrix).winner
    traces = collect_runs(cfg, matrix)
    agg = aggregate(traces, winner)

    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        (out / "traces").mkdir(parents=True, exist_ok=True)
        with open(out / "config.json", "w") as fh:
            fh.write(json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n")
        save_matrix(matrix, out / "matrix.csv")
        for r, tr in enumerate(traces):
            save_trace(tr, out / "traces" / f"run_{r:04d}.csv")
        _write_aggregate(agg, matrix_sha256(matrix), out)
    return agg


def emit_plot_data(result: AggregateResult, bound_overlays, out_dir):
    """Write plot-ready regret and accuracy grids; returns the two paths.

    ``bound_overlays`` maps column name -> per-checkpoint values (theory
    curves, typically); each becomes an extra regret column, passed through
    verbatim.  Checkpoints are >= 1 by construction so both grids are safe
    on log axes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    overlays = dict(bound_overlays)
    for name, values in overlays.items():
        if not isinstance(name, str) or not name or any(c in name for c in ",\n\r"):
            raise ValueError(f"overlay name {name!r} is not a valid CSV column")
        arr = np.asarray(values, dtype=float)
        if arr.shape != result.ts.shape:
            raise ValueError(
                f"overlay {name!r} has {arr.size} values for "
                f"{result.ts.size} checkpoints"
            )
        overlays[name] = arr

    regret_path = out / "regret.csv"
    with open(regret_path, "w") as fh:
        cols = ["t", "mean_regret", "min_regret", "max_regret", *overlays]
        fh.write(",".join(cols) + "\n")
        for r in range(result.ts.size):
            row = [str(int(result.ts[r])), repr(float(result.mean_regret[r])),
                   repr(float(result.min_regret[r])),
                   repr(float(result.max_regret[r]))]
            row += [repr(float(overlays[name][r])) for name in overlays]
            fh.write(",".join(row) + "\n")

    accuracy_path = out / "accuracy.csv"
    with open(accuracy_path, "w") as fh:
        fh.write("t,accuracy\n")
        for r in range(result.ts.size):
            fh.write(f"{int(result.ts[r])},{float(result.accuracy[r])!r}\n")
    return regret_path, accuracy_path
