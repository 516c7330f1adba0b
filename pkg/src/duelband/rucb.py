"""Relative upper-confidence-bound arm selection for dueling bandits.

The algorithm keeps a wins matrix ``w`` (``w[i, j]`` = times i beat j) and at
each step builds an optimistic estimate of every pairwise win probability:

    u[i, j] = w[i, j] / n[i, j] + sqrt(alpha * ln t / n[i, j])

with ``n = w + w.T``, uncompared pairs optimistic at 2, and the diagonal
pinned to 1/2.  A champion is drawn uniformly from the arms whose row never
drops below 1/2 (from all arms when that pool is empty), the challenger is
the row index maximising ``u[:, c]`` with ties broken uniformly among the
challengers other than the champion itself, and the pair is dueled.

Two execution paths produce bit-identical traces from the same seed: the
step-by-step functions here (``select_pair`` / ``update``), and the compiled
loop in ``duelband._loops`` used by :func:`run`.  Both consume three uniform
draws per step (champion, tie-break, duel) from one PCG64 stream and share
the precomputed ``sqrt(alpha ln t)`` table, so every floating-point operation
matches.  ``tests/test_rucb.py`` pins that equivalence down to the byte.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._loops import pair_covered, random_pairing_loop, rucb_loop
from .bounds import BoundParams, c_delta
from .env import RNG_ALGORITHM, DuelEnv, DuelOutcome, step_regret
from .errors import AlphaTooSmallError, PairMismatchError
from .preference import GapVector, PreferenceMatrix, gaps, matrix_sha256

__all__ = [
    "RucbState",
    "OptimisticMatrix",
    "StepDecision",
    "CheckpointLog",
    "StepLog",
    "CoverageAudit",
    "RunTrace",
    "bonus_scale",
    "optimistic_matrix",
    "select_pair",
    "update",
    "best_arm",
    "log_checkpoints",
    "run",
    "random_pairing_run",
    "save_trace",
]


def bonus_scale(alpha: float, t: int) -> float:
    """sqrt(alpha * ln t), the confidence-bonus numerator at step t."""
    return math.sqrt(alpha * math.log(t))


@lru_cache(maxsize=8)
def _bonus_scales(alpha: float, horizon: int) -> np.ndarray:
    # Filled by the same scalar calls the component path makes, never by a
    # vectorised log: numpy's SIMD log may differ from libm in the last ulp,
    # and the kernel/component equality guarantee rides on these bytes.
    out = np.empty(horizon + 1)
    out[0] = 0.0
    for t in range(1, horizon + 1):
        out[t] = bonus_scale(alpha, t)
    out.setflags(write=False)
    return out


@dataclass
class RucbState:
    """Mutable algorithm state: wins, the step about to run, self-duel tallies.

    ``t`` is 1-based and names the next decision, so a fresh state has
    ``t == 1`` and the optimistic matrix built from it uses ``ln 1 = 0``.
    Self-duels never touch ``w``; they are tallied separately per arm.
    """

    k: int
    alpha: float
    w: np.ndarray
    t: int
    self_duels: np.ndarray

    @classmethod
    def fresh(cls, k: int, alpha: float) -> "RucbState":
        if k < 1:
            raise ValueError(f"need at least one arm, got k={k}")
        if not alpha > 0.5:
            raise AlphaTooSmallError(f"alpha must exceed 1/2, got {alpha}")
        return cls(
            k=k,
            alpha=float(alpha),
            w=np.zeros((k, k), dtype=np.int64),
            t=1,
            self_duels=np.zeros(k, dtype=np.int64),
        )


@dataclass(frozen=True)
class OptimisticMatrix:
    """Upper and lower confidence matrices; ``l = 1 - u.T`` exactly."""

    u: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        self.u.setflags(write=False)
        self.l.setflags(write=False)


@dataclass(frozen=True)
class StepDecision:
    """One step's choices: champion c, challenger d, and the champion pool.

    ``champion_pool`` is the (possibly empty) ascending tuple of arms whose
    optimistic row never fell below 1/2; ``pool_was_empty`` records whether
    the champion had to be drawn from all arms instead.
    """

    c: int
    d: int
    champion_pool: tuple
    pool_was_empty: bool


def optimistic_matrix(state: RucbState) -> OptimisticMatrix:
    """Confidence matrices for the decision at ``state.t``."""
    w = state.w.astype(np.float64)
    n = w + w.T
    s = bonus_scale(state.alpha, state.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = w / n + s / np.sqrt(n)
    u[n == 0.0] = 2.0
    np.fill_diagonal(u, 0.5)
    return OptimisticMatrix(u=u, l=1.0 - u.T)


def _pick(u: float, m: int) -> int:
    """Uniform index in [0, m) from one uniform draw, clamped at the top."""
    idx = int(u * m)
    return m - 1 if idx >= m else idx


def select_pair(state: RucbState, rng: np.random.Generator) -> StepDecision:
    """Choose champion and challenger, consuming exactly two uniform draws.

    Both draws happen unconditionally (even when the pool is a singleton or
    the challenger is unique) so that replaying a trace stays aligned with
    the pre-drawn uniform block the compiled loop uses.
    """
    u = optimistic_matrix(state).u
    k = state.k
    pool = np.flatnonzero((u >= 0.5).all(axis=1))
    u1 = rng.random()
    if pool.size > 0:
        c = int(pool[_pick(u1, pool.size)])
        was_empty = False
    else:
        c = _pick(u1, k)
        was_empty = True

    col = u[:, c]
    mx = col.max()
    maxers = np.flatnonzero(col == mx)
    others = maxers[maxers != c]
    cand = others if others.size > 0 else maxers
    u2 = rng.random()
    d = int(cand[_pick(u2, cand.size)])
    return StepDecision(
        c=c,
        d=d,
        champion_pool=tuple(int(a) for a in pool),
        pool_was_empty=was_empty,
    )


def update(state: RucbState, outcome: DuelOutcome) -> None:
    """Fold one duel outcome into the state and advance the clock.

    The outcome's timestamp must equal ``state.t``: feeding results out of
    order (or twice) is a bug worth failing loudly on.
    """
    if outcome.t != state.t:
        raise PairMismatchError(
            f"outcome stamped t={outcome.t}, state expects t={state.t}"
        )
    if outcome.i == outcome.j:
        state.self_duels[outcome.i] += 1
    else:
        loser = outcome.j if outcome.winner == outcome.i else outcome.i
        state.w[outcome.winner, loser] += 1
    state.t += 1


def best_arm(state: RucbState) -> int:
    """Arm beating the most rivals by empirical majority, uncompared counting as beaten.

    Ties go to the lowest index.
    """
    w = state.w.astype(np.float64)
    n = w + w.T
    with np.errstate(invalid="ignore"):
        ratio = w / n
    beats = (n == 0.0) | (ratio > 0.5)
    np.fill_diagonal(beats, False)
    return int(np.argmax(beats.sum(axis=1)))


# ---------------------------------------------------------------------------
# Full runs


@dataclass(frozen=True)
class CheckpointLog:
    """Per-checkpoint snapshots, aligned by row.

    ``n[r]`` is the comparison-count matrix after checkpoint step ``ts[r]``,
    with self-duel tallies on the diagonal.  ``i``, ``j``, ``winner`` and
    ``step_regret`` describe the single step that landed on the checkpoint.
    """

    ts: np.ndarray
    cum_regret: np.ndarray
    best_arm: np.ndarray
    n: np.ndarray
    i: np.ndarray
    j: np.ndarray
    winner: np.ndarray
    step_regret: np.ndarray

    def __post_init__(self):
        for a in (self.ts, self.cum_regret, self.best_arm, self.n,
                  self.i, self.j, self.winner, self.step_regret):
            a.setflags(write=False)


@dataclass(frozen=True)
class StepLog:
    """Full per-step record; row r is step t = r + 1."""

    i: np.ndarray
    j: np.ndarray
    winner: np.ndarray
    step_regret: np.ndarray
    cum_regret: np.ndarray

    def __post_init__(self):
        for a in (self.i, self.j, self.winner, self.step_regret, self.cum_regret):
            a.setflags(write=False)


@dataclass(frozen=True)
class CoverageAudit:
    """Outcome of the in-run confidence-interval audit.

    From ``t_start = floor(C(delta)) + 1`` onward every pair's interval is
    checked against the true matrix (one full sweep at ``t_start``, then the
    freshly updated pair, whose interval is the only one that can shrink).
    ``first_violation`` is ``(t, i, j)`` for the earliest failure, or None.
    ``nonwinner_self_duels_after`` counts steps t > t_start where a
    non-winner arm dueled itself; under full coverage there should be none.
    """

    delta: float
    alpha: float
    c_value: float
    t_start: int
    violated: bool
    first_violation: tuple | None
    nonwinner_self_duels_after: int


@dataclass(frozen=True)
class RunTrace:
    """Everything one simulated run produced."""

    algorithm: str
    k: int
    alpha: float | None
    horizon: int
    seed: int
    rng_algorithm: str
    matrix_hash: str
    checkpoints: CheckpointLog
    steps: StepLog | None
    final_cum_regret: float
    final_best_arm: int
    final_w: np.ndarray
    final_self_duels: np.ndarray
    audit: CoverageAudit | None

    def __post_init__(self):
        self.final_w.setflags(write=False)
        self.final_self_duels.setflags(write=False)


def log_checkpoints(horizon: int, count: int = 20, first: int = 10) -> tuple:
    """Roughly log-spaced checkpoint steps from ``first`` to ``horizon``.

    Duplicates from rounding are dropped, the horizon itself is always
    included, and the result is a strictly increasing tuple of ints.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    lo = min(first, horizon)
    raw = np.logspace(math.log10(lo), math.log10(horizon), count)
    ts = {min(max(int(round(float(x))), 1), horizon) for x in raw}
    ts.add(horizon)
    return tuple(sorted(ts))


def _checkpoint_array(checkpoints, horizon: int) -> np.ndarray:
    ts = np.asarray(list(checkpoints), dtype=np.int64)
    if ts.size == 0:
        raise ValueError("need at least one checkpoint")
    if np.any(ts < 1) or np.any(ts > horizon):
        raise ValueError(f"checkpoints must lie in [1, {horizon}]")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    return ts


@dataclass(frozen=True)
class _AuditConfig:
    delta: float
    alpha: float
    c_value: float
    t_start: int
    winner: int


def _audit_setup(audit_delta, audit_alpha, default_alpha, k, g: GapVector,
                 horizon: int | None) -> _AuditConfig | None:
    if audit_delta is None:
        if audit_alpha is not None:
            raise ValueError("audit_alpha given without audit_delta")
        return None
    aa = float(audit_alpha) if audit_alpha is not None else float(default_alpha)
    c = c_delta(BoundParams(alpha=aa, k=k, delta=float(audit_delta), gaps=g))
    # The cap keeps the kernel's bonus table in bounds; open-ended runs have
    # no horizon and audit from floor(C)+1 however far the run goes.
    if not math.isfinite(c):
        t_start = (horizon + 1) if horizon is not None else 2**62
    elif horizon is not None:
        t_start = min(math.floor(c) + 1, horizon + 1)
    else:
        t_start = math.floor(c) + 1
    return _AuditConfig(
        delta=float(audit_delta), alpha=aa, c_value=c, t_start=t_start,
        winner=g.winner,
    )


def _finish_audit(cfg: _AuditConfig | None, audit_out) -> CoverageAudit | None:
    if cfg is None:
        return None
    violated = bool(audit_out[0])
    first = (
        (int(audit_out[1]), int(audit_out[2]), int(audit_out[3]))
        if violated else None
    )
    return CoverageAudit(
        delta=cfg.delta,
        alpha=cfg.alpha,
        c_value=cfg.c_value,
        t_start=cfg.t_start,
        violated=violated,
        first_violation=first,
        nonwinner_self_duels_after=int(audit_out[4]),
    )


def _alloc_outputs(k: int, horizon: int, n_cp: int, record_steps: bool):
    size = horizon if record_steps else 0
    steps = (
        np.zeros(size, dtype=np.int64),
        np.zeros(size, dtype=np.int64),
        np.zeros(size, dtype=np.int64),
        np.zeros(size),
        np.zeros(size),
    )
    cps = (
        np.zeros(n_cp),
        np.zeros(n_cp, dtype=np.int64),
        np.zeros((n_cp, k, k), dtype=np.int64),
        np.zeros(n_cp, dtype=np.int64),
        np.zeros(n_cp, dtype=np.int64),
        np.zeros(n_cp, dtype=np.int64),
        np.zeros(n_cp),
    )
    audit_out = np.zeros(5, dtype=np.int64)
    audit_out[1:4] = -1
    out_w = np.zeros((k, k), dtype=np.int64)
    out_self = np.zeros(k, dtype=np.int64)
    return steps, cps, audit_out, out_w, out_self


def _assemble_trace(algorithm, matrix, alpha, horizon, seed, rng_id, cp_ts,
                    steps, cps, record_steps, cum, audit_cfg, audit_out,
                    out_w, out_self) -> RunTrace:
    st_i, st_j, st_win, st_reg, st_cum = steps
    cp_cum, cp_best, cp_n, cp_i, cp_j, cp_win, cp_reg = cps
    log = CheckpointLog(
        ts=cp_ts, cum_regret=cp_cum, best_arm=cp_best, n=cp_n,
        i=cp_i, j=cp_j, winner=cp_win, step_regret=cp_reg,
    )
    step_log = None
    if record_steps:
        step_log = StepLog(
            i=st_i, j=st_j, winner=st_win, step_regret=st_reg, cum_regret=st_cum,
        )
    final_state = RucbState(
        k=matrix.k, alpha=alpha if alpha is not None else 1.0,
        w=out_w.copy(), t=horizon + 1, self_duels=out_self.copy(),
    )
    return RunTrace(
        algorithm=algorithm,
        k=matrix.k,
        alpha=alpha,
        horizon=horizon,
        seed=seed,
        rng_algorithm=rng_id,
        matrix_hash=matrix_sha256(matrix),
        checkpoints=log,
        steps=step_log,
        final_cum_regret=float(cum),
        final_best_arm=best_arm(final_state),
        final_w=out_w,
        final_self_duels=out_self,
        audit=_finish_audit(audit_cfg, audit_out),
    )


def run(
    matrix: PreferenceMatrix,
    alpha: float,
    horizon: int | None,
    seed: int,
    *,
    checkpoints=None,
    record_steps: bool = False,
    audit_delta: float | None = None,
    audit_alpha: float | None = None,
    use_kernel: bool = True,
    stop=None,
) -> RunTrace:
    """Simulate one full run against ``matrix`` and return its trace.

    ``horizon`` is the number of steps; passing None requires a ``stop``
    callable (checked on the state after each step) and forces the
    step-by-step path.  ``audit_delta`` switches on the coverage audit at
    confidence ``delta`` (bonus recomputed with ``audit_alpha`` when that
    differs from the run's exploration alpha).  ``use_kernel=False`` runs
    the component loop instead of the compiled one; same seed, same bytes.
    """
    if not alpha > 0.5:
        raise AlphaTooSmallError(f"alpha must exceed 1/2, got {alpha}")
    g = gaps(matrix)
    if horizon is None:
        if stop is None:
            raise ValueError("open-ended runs need a stop callable")
        return _component_run(
            matrix, alpha, None, seed, checkpoints, record_steps,
            g, audit_delta, audit_alpha, stop,
        )
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if not use_kernel:
        return _component_run(
            matrix, alpha, horizon, seed, checkpoints, record_steps,
            g, audit_delta, audit_alpha, None,
        )

    k = matrix.k
    cp_ts = _checkpoint_array(
        checkpoints if checkpoints is not None else (horizon,), horizon
    )
    cfg = _audit_setup(audit_delta, audit_alpha, alpha, k, g, horizon)
    su = _bonus_scales(float(alpha), horizon)
    audit_su = _bonus_scales(cfg.alpha, horizon) if cfg is not None else su
    uniforms = np.random.default_rng(seed).random(3 * horizon)
    steps, cps, audit_out, out_w, out_self = _alloc_outputs(
        k, horizon, cp_ts.size, record_steps
    )
    cum = rucb_loop(
        matrix.p, g.delta, su, uniforms, horizon, cp_ts,
        steps[0], steps[1], steps[2], steps[3], steps[4], record_steps,
        cps[0], cps[1], cps[2], cps[3], cps[4], cps[5], cps[6],
        cfg is not None,
        cfg.t_start if cfg is not None else horizon + 1,
        audit_su,
        cfg.winner if cfg is not None else -1,
        audit_out, out_w, out_self,
    )
    return _assemble_trace(
        "rucb", matrix, float(alpha), horizon, seed,
        f"{RNG_ALGORITHM}:3-uniforms-per-step", cp_ts, steps, cps,
        record_steps, cum, cfg, audit_out, out_w, out_self,
    )


def _audit_full_sweep_py(p, wf, nf, sa, t, audit_out):
    k = p.shape[0]
    for i in range(k):
        for j in range(k):
            if i != j and not pair_covered(p, wf, nf, sa, i, j):
                if audit_out[0] == 0:
                    audit_out[0] = 1
                    audit_out[1] = t
                    audit_out[2] = i
                    audit_out[3] = j
                return


def _audit_pair_py(p, wf, nf, sa, t, i, j, audit_out):
    if not (pair_covered(p, wf, nf, sa, i, j)
            and pair_covered(p, wf, nf, sa, j, i)):
        if audit_out[0] == 0:
            audit_out[0] = 1
            audit_out[1] = t
            audit_out[2] = i
            audit_out[3] = j


def _component_run(matrix, alpha, horizon, seed, checkpoints, record_steps,
                   g, audit_delta, audit_alpha, stop) -> RunTrace:
    """Step-by-step twin of the compiled loop, for cross-validation and
    open-ended runs.  Slow by design; every decision goes through the public
    component functions."""
    k = matrix.k
    state = RucbState.fresh(k, alpha)
    rng = np.random.default_rng(seed)
    env = DuelEnv(matrix, rng)

    bound = horizon
    if checkpoints is not None:
        checkpoints = list(checkpoints)
        cp_set = _checkpoint_array(checkpoints, bound if bound is not None
                                   else max(checkpoints))
    else:
        cp_set = np.asarray([bound] if bound is not None else [], dtype=np.int64)
    cfg = _audit_setup(audit_delta, audit_alpha, alpha, k, g, bound)
    audit_out = np.zeros(5, dtype=np.int64)
    audit_out[1:4] = -1

    rows = []       # checkpoint tuples (t, cum, best, n, i, j, win, reg)
    step_rows = []  # (i, j, win, reg, cum) when recording
    cum = 0.0
    cp_idx = 0
    last = (0, 0, 0, 0.0)
    counter = range(1, bound + 1) if bound is not None else itertools.count(1)
    t_done = 0
    for t in counter:
        dec = select_pair(state, rng)
        outcome = env.duel(dec.c, dec.d)
        reg = step_regret(g, dec.c, dec.d)
        cum += reg
        update(state, outcome)
        last = (dec.c, dec.d, outcome.winner, reg)
        t_done = t

        if cfg is not None and t >= cfg.t_start:
            sa = bonus_scale(cfg.alpha, t)
            wf = state.w.astype(np.float64)
            nf = wf + wf.T
            if t == cfg.t_start:
                _audit_full_sweep_py(matrix.p, wf, nf, sa, t, audit_out)
            elif dec.c != dec.d:
                _audit_pair_py(matrix.p, wf, nf, sa, t, dec.c, dec.d, audit_out)
            if dec.c == dec.d and t > cfg.t_start and dec.c != cfg.winner:
                audit_out[4] += 1

        if record_steps:
            step_rows.append((dec.c, dec.d, outcome.winner, reg, cum))

        if cp_idx < cp_set.size and t == cp_set[cp_idx]:
            rows.append(_snapshot(state, t, cum, last))
            cp_idx += 1

        if stop is not None and stop(state):
            break

    if stop is not None and (not rows or rows[-1][0] != t_done):
        rows.append(_snapshot(state, t_done, cum, last))

    return _pack_component_trace(
        matrix, alpha, t_done, seed, rows, step_rows, record_steps, cum,
        state, cfg, audit_out,
    )


def _snapshot(state: RucbState, t: int, cum: float, last):
    n = state.w + state.w.T
    n[np.diag_indices(state.k)] = state.self_duels
    return (t, cum, best_arm(state), n, last[0], last[1], last[2], last[3])


def _pack_component_trace(matrix, alpha, horizon, seed, rows, step_rows,
                          record_steps, cum, state, cfg, audit_out) -> RunTrace:
    k = matrix.k
    n_cp = len(rows)
    cp_ts = np.asarray([r[0] for r in rows], dtype=np.int64)
    cps = (
        np.asarray([r[1] for r in rows]),
        np.asarray([r[2] for r in rows], dtype=np.int64),
        (np.stack([r[3] for r in rows]).astype(np.int64) if n_cp
         else np.zeros((0, k, k), dtype=np.int64)),
        np.asarray([r[4] for r in rows], dtype=np.int64),
        np.asarray([r[5] for r in rows], dtype=np.int64),
        np.asarray([r[6] for r in rows], dtype=np.int64),
        np.asarray([r[7] for r in rows]),
    )
    steps = (
        np.asarray([r[0] for r in step_rows], dtype=np.int64),
        np.asarray([r[1] for r in step_rows], dtype=np.int64),
        np.asarray([r[2] for r in step_rows], dtype=np.int64),
        np.asarray([r[3] for r in step_rows]),
        np.asarray([r[4] for r in step_rows]),
    )
    return _assemble_trace(
        "rucb", matrix, float(alpha), horizon, seed,
        f"{RNG_ALGORITHM}:3-uniforms-per-step", cp_ts, steps, cps,
        record_steps, cum, cfg, audit_out, state.w.copy(),
        state.self_duels.copy(),
    )


def random_pairing_run(
    matrix: PreferenceMatrix,
    horizon: int,
    seed: int,
    *,
    checkpoints=None,
    record_steps: bool = False,
    audit_delta: float | None = None,
    audit_alpha: float | None = None,
) -> RunTrace:
    """Baseline: duel a uniformly random unordered pair each step.

    Two uniform draws per step (pair, duel).  The trace format matches
    :func:`run`, including the empirical-majority best-arm snapshots, so the
    two algorithms aggregate through the same pipeline.  Auditing needs an
    explicit ``audit_alpha`` since there is no exploration alpha to borrow.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if audit_delta is not None and audit_alpha is None:
        raise ValueError("random pairing audits need an explicit audit_alpha")
    g = gaps(matrix)
    k = matrix.k
    cp_ts = _checkpoint_array(
        checkpoints if checkpoints is not None else (horizon,), horizon
    )
    cfg = _audit_setup(audit_delta, audit_alpha, audit_alpha, k, g, horizon)
    audit_su = (_bonus_scales(cfg.alpha, horizon) if cfg is not None
                else np.zeros(1))

    if k == 1:
        pair_a = np.zeros(1, dtype=np.int64)
        pair_b = np.zeros(1, dtype=np.int64)
    else:
        ab = [(i, j) for i in range(k) for j in range(i + 1, k)]
        pair_a = np.asarray([x[0] for x in ab], dtype=np.int64)
        pair_b = np.asarray([x[1] for x in ab], dtype=np.int64)

    uniforms = np.random.default_rng(seed).random(2 * horizon)
    steps, cps, audit_out, out_w, out_self = _alloc_outputs(
        k, horizon, cp_ts.size, record_steps
    )
    cum = random_pairing_loop(
        matrix.p, g.delta, uniforms, horizon, pair_a, pair_b, cp_ts,
        steps[0], steps[1], steps[2], steps[3], steps[4], record_steps,
        cps[0], cps[1], cps[2], cps[3], cps[4], cps[5], cps[6],
        cfg is not None,
        cfg.t_start if cfg is not None else horizon + 1,
        audit_su,
        cfg.winner if cfg is not None else -1,
        audit_out, out_w, out_self,
    )
    return _assemble_trace(
        "random_pairing", matrix, None, horizon, seed,
        f"{RNG_ALGORITHM}:2-uniforms-per-step", cp_ts, steps, cps,
        record_steps, cum, cfg, audit_out, out_w, out_self,
    )


# ---------------------------------------------------------------------------
# Serialization


def _trace_rows(trace: RunTrace, resolution: str):
    if resolution == "auto":
        resolution = "steps" if trace.steps is not None else "checkpoints"
    if resolution == "steps":
        if trace.steps is None:
            raise ValueError("trace was recorded without per-step rows")
        s = trace.steps
        for r in range(s.i.size):
            yield (r + 1, s.i[r], s.j[r], s.winner[r],
                   s.step_regret[r], s.cum_regret[r])
    elif resolution == "checkpoints":
        c = trace.checkpoints
        for r in range(c.ts.size):
            yield (c.ts[r], c.i[r], c.j[r], c.winner[r],
                   c.step_regret[r], c.cum_regret[r])
    else:
        raise ValueError(f"unknown resolution {resolution!r}")


def save_trace(trace: RunTrace, csv_path, *, resolution: str = "auto"):
    """Write a trace as CSV plus a JSON sidecar; returns both paths.

    The CSV rows are ``t,i,j,winner,step_regret,cum_regret`` at per-step or
    per-checkpoint resolution ("auto" picks steps when they were recorded).
    The sidecar carries everything needed to reproduce the run: seed, alpha,
    RNG stream id with the draws-per-step convention, matrix digest, the
    checkpoint schedule, and audit results when an audit ran.
    """
    csv_path = Path(csv_path)
    with open(csv_path, "w") as fh:
        fh.write("t,i,j,winner,step_regret,cum_regret\n")
        for t, i, j, win, reg, cum in _trace_rows(trace, resolution):
            fh.write(f"{int(t)},{int(i)},{int(j)},{int(win)},"
                     f"{float(reg)!r},{float(cum)!r}\n")

    audit = None
    if trace.audit is not None:
        a = trace.audit
        audit = {
            "delta": a.delta,
            "alpha": a.alpha,
            "c_value": a.c_value if math.isfinite(a.c_value) else "inf",
            "t_start": a.t_start,
            "violated": a.violated,
            "first_violation": list(a.first_violation)
            if a.first_violation is not None else None,
            "nonwinner_self_duels_after": a.nonwinner_self_duels_after,
        }
    sidecar = {
        "algorithm": trace.algorithm,
        "k": trace.k,
        "alpha": trace.alpha,
        "horizon": trace.horizon,
        "seed": trace.seed,
        "rng": trace.rng_algorithm,
        "matrix_sha256": trace.matrix_hash,
        "checkpoint_ts": [int(t) for t in trace.checkpoints.ts],
        "final_cum_regret": trace.final_cum_regret,
        "final_best_arm": trace.final_best_arm,
        "audit": audit,
    }
    json_path = csv_path.with_suffix(".json")
    with open(json_path, "w") as fh:
        fh.write(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
