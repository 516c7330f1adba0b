"""Algorithm-layer tests: component semantics, kernel equivalence, traces."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duelband.env import DuelEnv, DuelOutcome
from duelband.errors import AlphaTooSmallError, PairMismatchError
from duelband.preference import generate_planted, validate
from duelband.rucb import (
    RucbState,
    best_arm,
    bonus_scale,
    log_checkpoints,
    optimistic_matrix,
    random_pairing_run,
    run,
    save_trace,
    select_pair,
    update,
)


class ScriptedRng:
    """Stands in for a Generator; returns a fixed sequence of uniforms."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def state_with(k, alpha, t, wins):
    s = RucbState.fresh(k, alpha)
    for (i, j), count in wins.items():
        s.w[i, j] = count
    s.t = t
    return s


# ---------------------------------------------------------------------------
# Optimistic matrix


def test_optimistic_matrix_hand_value():
    # 3 wins vs 1 loss on four comparisons at t=10 under alpha=0.51:
    # 3/4 + sqrt(0.51 ln 10 / 4).
    s = state_with(2, 0.51, 10, {(0, 1): 3, (1, 0): 1})
    om = optimistic_matrix(s)
    assert om.u[0, 1] == pytest.approx(1.291830, abs=1e-6)
    assert om.u[1, 0] == pytest.approx(0.25 + math.sqrt(0.51 * math.log(10) / 4),
                                       abs=1e-12)
    assert om.l[1, 0] == 1.0 - om.u[0, 1]


def test_optimistic_matrix_fresh_state():
    s = RucbState.fresh(4, 1.0)
    om = optimistic_matrix(s)
    off = ~np.eye(4, dtype=bool)
    assert np.all(om.u[off] == 2.0)
    assert np.all(np.diag(om.u) == 0.5)
    assert np.all(om.l[off] == -1.0)
    assert np.all(np.diag(om.l) == 0.5)


def test_lower_matrix_is_complement_of_transpose():
    s = state_with(3, 0.6, 40, {(0, 1): 5, (1, 0): 2, (2, 1): 7, (0, 2): 1})
    om = optimistic_matrix(s)
    assert np.array_equal(om.l, 1.0 - om.u.T)


def test_interval_width_identity():
    # For a compared pair, u - l collapses to twice the bonus because the
    # two empirical means sum to one.
    s = state_with(3, 0.75, 123, {(0, 1): 9, (1, 0): 4, (2, 0): 1, (0, 2): 2})
    om = optimistic_matrix(s)
    for i, j, n in [(0, 1, 13), (1, 0, 13), (2, 0, 3), (0, 2, 3)]:
        width = om.u[i, j] - om.l[i, j]
        assert width == pytest.approx(
            2.0 * bonus_scale(0.75, 123) / math.sqrt(n), abs=1e-12
        )


def test_alpha_at_or_below_half_rejected():
    with pytest.raises(AlphaTooSmallError):
        RucbState.fresh(3, 0.5)
    with pytest.raises(AlphaTooSmallError):
        run(generate_planted(3, 0.1, 0.2, seed=0), 0.3, 10, seed=0)


# ---------------------------------------------------------------------------
# Pair selection


def test_fresh_state_never_self_duels():
    for seed in range(25):
        s = RucbState.fresh(5, 1.0)
        dec = select_pair(s, np.random.default_rng(seed))
        assert dec.d != dec.c
        assert dec.champion_pool == (0, 1, 2, 3, 4)
        assert not dec.pool_was_empty


def test_single_arm_self_duels():
    dec = select_pair(RucbState.fresh(1, 1.0), np.random.default_rng(0))
    assert (dec.c, dec.d) == (0, 0)
    assert dec.champion_pool == (0,)


def test_challenger_tie_break_excludes_champion():
    # At t=1 the bonus is zero, so ties can be staged exactly: arms 1 and 2
    # both sit at u[j, 0] = 1/2, equal to u[0, 0].  The challenger draw must
    # choose between 1 and 2 and never return the champion itself.
    s = state_with(4, 1.0, 1, {(1, 0): 1, (0, 1): 1, (2, 0): 1, (0, 2): 1,
                               (0, 3): 2})
    assert select_pair(s, ScriptedRng([0.0, 0.0])).d == 1
    assert select_pair(s, ScriptedRng([0.0, 0.99])).d == 2
    for u2 in np.linspace(0.0, 0.999, 17):
        dec = select_pair(s, ScriptedRng([0.0, float(u2)]))
        assert dec.c == 0 and dec.d in (1, 2)


def test_champion_self_duel_when_strictly_best():
    # Every rival's upper estimate against arm 0 sits below 1/2, so the
    # column maximum is the diagonal entry and the champion duels itself.
    s = state_with(3, 1.0, 1, {(0, 1): 4, (0, 2): 4})
    dec = select_pair(s, ScriptedRng([0.0, 0.5]))
    assert (dec.c, dec.d) == (0, 0)


def test_select_pair_consumes_exactly_two_uniforms():
    rng = ScriptedRng([0.3, 0.7])
    select_pair(RucbState.fresh(4, 1.0), rng)
    assert rng.values == []


# ---------------------------------------------------------------------------
# Update and best arm


def test_update_requires_matching_timestamp():
    s = RucbState.fresh(3, 1.0)
    out = DuelOutcome(i=0, j=1, winner=1, t=1)
    update(s, out)
    assert s.w[1, 0] == 1 and s.t == 2
    with pytest.raises(PairMismatchError):
        update(s, out)
    with pytest.raises(PairMismatchError):
        update(s, DuelOutcome(i=0, j=1, winner=0, t=5))


def test_update_self_duel_counts_separately():
    s = RucbState.fresh(3, 1.0)
    update(s, DuelOutcome(i=2, j=2, winner=2, t=1))
    assert s.w.sum() == 0
    assert s.self_duels[2] == 1 and s.t == 2


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.booleans()), max_size=60))
@settings(deadline=None)
def test_update_conserves_duel_count(duels):
    s = RucbState.fresh(4, 1.0)
    for t, (i, j, first_wins) in enumerate(duels, start=1):
        winner = i if first_wins else j
        update(s, DuelOutcome(i=i, j=j, winner=winner, t=t))
    assert int(s.w.sum()) + int(s.self_duels.sum()) == len(duels)
    assert s.t == len(duels) + 1


def test_best_arm_majority_and_ties():
    assert best_arm(state_with(2, 1.0, 9, {(0, 1): 3, (1, 0): 1})) == 0
    assert best_arm(state_with(2, 1.0, 9, {(0, 1): 1, (1, 0): 3})) == 1
    # Fresh state: everyone beats everyone vacuously, lowest index wins.
    assert best_arm(RucbState.fresh(3, 1.0)) == 0
    # Uncompared counts as a beat; arm 2's real win ties it with arm 0,
    # which still wins on index.
    assert best_arm(state_with(3, 1.0, 2, {(2, 1): 1})) == 0
    # An exact 50/50 record is not a beat.
    assert best_arm(state_with(2, 1.0, 5, {(0, 1): 2, (1, 0): 2})) == 0


# ---------------------------------------------------------------------------
# Full runs: the compiled loop against the component loop


@pytest.mark.parametrize("k,dmin,dmax,alpha,audit_alpha", [
    (2, 0.2, 0.2, 1.0, None),
    (5, 0.05, 0.3, 0.51, None),
    (7, 0.02, 0.45, 2.0, 0.75),
])
def test_kernel_matches_component_loop_bitwise(k, dmin, dmax, alpha, audit_alpha):
    m = generate_planted(k, dmin, dmax, seed=k)
    cps = (1, 7, 50, 211, 400)
    for seed in range(3):
        kwargs = dict(checkpoints=cps, record_steps=True,
                      audit_delta=0.3, audit_alpha=audit_alpha)
        a = run(m, alpha, 400, seed=seed, **kwargs)
        b = run(m, alpha, 400, seed=seed, use_kernel=False, **kwargs)
        assert a.final_cum_regret == b.final_cum_regret
        assert a.final_best_arm == b.final_best_arm
        assert np.array_equal(a.final_w, b.final_w)
        assert np.array_equal(a.final_self_duels, b.final_self_duels)
        for field in ("i", "j", "winner", "step_regret", "cum_regret"):
            assert np.array_equal(getattr(a.steps, field),
                                  getattr(b.steps, field)), field
        for field in ("ts", "cum_regret", "best_arm", "n", "i", "j",
                      "winner", "step_regret"):
            assert np.array_equal(getattr(a.checkpoints, field),
                                  getattr(b.checkpoints, field)), field
        assert a.audit == b.audit


def test_pregenerated_uniform_block_matches_sequential_draws():
    # The kernel draws its whole uniform block up front; the component path
    # draws one at a time from an identically seeded stream.  Equality of
    # the two consumption styles is what keeps the traces aligned.
    block = np.random.default_rng(123).random(64)
    one_at_a_time = np.array(
        [np.random.default_rng(123).random() for _ in range(1)]
    )
    assert block[0] == one_at_a_time[0]
    gen = np.random.default_rng(123)
    sequential = np.array([gen.random() for _ in range(64)])
    assert np.array_equal(block, sequential)


def test_same_seed_reproduces_trace_exactly():
    m = generate_planted(4, 0.1, 0.3, seed=2)
    a = run(m, 1.0, 500, seed=9, record_steps=True)
    b = run(m, 1.0, 500, seed=9, record_steps=True)
    c = run(m, 1.0, 500, seed=10, record_steps=True)
    assert a.final_cum_regret == b.final_cum_regret
    assert np.array_equal(a.steps.winner, b.steps.winner)
    assert not np.array_equal(a.steps.i, c.steps.i)


def test_horizon_one_trace():
    m = generate_planted(3, 0.2, 0.2, seed=0)
    tr = run(m, 1.0, 1, seed=0, record_steps=True)
    assert tr.horizon == 1
    assert tr.steps.i.size == 1
    assert tuple(tr.checkpoints.ts) == (1,)
    assert tr.final_cum_regret == tr.steps.cum_regret[0]


def test_open_ended_run_stops_on_callable():
    m = generate_planted(3, 0.2, 0.2, seed=0)
    tr = run(m, 1.0, None, seed=0, stop=lambda s: s.t > 120)
    assert tr.horizon == 120
    assert tuple(tr.checkpoints.ts)[-1] == 120
    with pytest.raises(ValueError):
        run(m, 1.0, None, seed=0)


def test_checkpoint_validation():
    m = generate_planted(3, 0.2, 0.2, seed=0)
    with pytest.raises(ValueError):
        run(m, 1.0, 100, seed=0, checkpoints=())
    with pytest.raises(ValueError):
        run(m, 1.0, 100, seed=0, checkpoints=(0, 50))
    with pytest.raises(ValueError):
        run(m, 1.0, 100, seed=0, checkpoints=(50, 101))
    with pytest.raises(ValueError):
        run(m, 1.0, 100, seed=0, checkpoints=(50, 50))


def test_log_checkpoint_schedule():
    cps = log_checkpoints(100_000, count=17)
    assert cps[0] == 10 and cps[-1] == 100_000
    assert all(b > a for a, b in zip(cps, cps[1:]))
    assert log_checkpoints(1) == (1,)
    assert log_checkpoints(5) == (5,)
    assert 10_000 in log_checkpoints(100_000, count=17)


def test_checkpoint_snapshot_diagonal_holds_self_duels():
    m = generate_planted(3, 0.3, 0.4, seed=1)
    tr = run(m, 0.51, 2000, seed=4, checkpoints=(2000,))
    snap = tr.checkpoints.n[0]
    assert np.array_equal(np.diag(snap), tr.final_self_duels)
    off = ~np.eye(3, dtype=bool)
    assert np.array_equal(snap[off], (tr.final_w + tr.final_w.T)[off])
    assert snap.sum() == 2000 + tr.final_w.sum()  # n double-counts pairs


# ---------------------------------------------------------------------------
# Random pairing baseline


def test_random_pairing_two_arms_always_duels_the_pair():
    m = validate([[0.5, 0.7], [0.3, 0.5]])
    tr = random_pairing_run(m, 300, seed=0, record_steps=True)
    assert np.all(tr.steps.i == 0) and np.all(tr.steps.j == 1)
    # Every step costs Delta_1 / 2 exactly.
    assert tr.final_cum_regret == pytest.approx(300 * 0.1, abs=1e-9)


def test_random_pairing_mean_regret_matches_pair_average():
    m = generate_planted(4, 0.1, 0.4, seed=6)
    from duelband.preference import gaps

    g = gaps(m)
    pair_regrets = np.array([
        0.5 * (g.delta[i] + g.delta[j])
        for i in range(4) for j in range(i + 1, 4)
    ])
    mu = pair_regrets.mean()
    sigma_step = pair_regrets.std()
    horizon = 20_000
    tr = random_pairing_run(m, horizon, seed=3)
    band = 4.0 * sigma_step * math.sqrt(horizon)
    assert abs(tr.final_cum_regret - horizon * mu) < band


def test_random_pairing_audit_needs_alpha():
    m = generate_planted(3, 0.2, 0.2, seed=0)
    with pytest.raises(ValueError):
        random_pairing_run(m, 100, seed=0, audit_delta=0.5)
    tr = random_pairing_run(m, 100, seed=0, audit_delta=0.5, audit_alpha=1.0)
    assert tr.audit is not None and tr.audit.alpha == 1.0


# ---------------------------------------------------------------------------
# Confidence-interval behaviour over many runs


def test_interval_coverage_beyond_confidence_horizon():
    # alpha=1, delta=1/4, K=5 puts the audit start at t=301; across 200
    # seeds the fraction of runs with any post-horizon miss must stay at or
    # under delta.  In a correctly calibrated implementation misses are far
    # rarer than that; a miscalibrated bonus fails this immediately.
    m = generate_planted(5, 0.1, 0.3, seed=3)
    violated = 0
    for seed in range(200):
        tr = run(m, 1.0, 2000, seed=seed, audit_delta=0.25)
        assert tr.audit.t_start == 301
        if tr.audit.violated:
            violated += 1
        else:
            assert tr.audit.nonwinner_self_duels_after == 0
    assert violated / 200 <= 0.25


def test_random_pairing_coverage_too():
    # The interval calibration is algorithm-independent; the baseline's
    # counts must respect it as well.
    m = generate_planted(4, 0.15, 0.3, seed=8)
    violated = sum(
        random_pairing_run(m, 1500, seed=s, audit_delta=0.25,
                           audit_alpha=1.0).audit.violated
        for s in range(100)
    )
    assert violated / 100 <= 0.25


def test_winner_monopolises_late_self_duels():
    # Once every rival's optimistic estimate drops below 1/2 the winner
    # duels itself; by the final tenth of a long run that is the norm.
    m = generate_planted(5, 0.2, 0.4, seed=5)
    fracs = []
    for seed in range(20):
        tr = run(m, 0.51, 100_000, seed=seed, record_steps=True)
        tail = slice(90_000, None)
        is_winner_self = (tr.steps.i[tail] == 0) & (tr.steps.j[tail] == 0)
        fracs.append(is_winner_self.mean())
    assert min(fracs) >= 0.8
    assert float(np.mean(fracs)) >= 0.9


def test_binomial_concentration_backing_the_bonus():
    # The confidence radius is calibrated against the exponential tail
    # bound P(mean - 1/2 >= a) <= exp(-2 n a^2); check it by simulation.
    rng = np.random.default_rng(77)
    trials = 100_000
    for n in (10, 100):
        draws = rng.binomial(n, 0.5, size=trials)
        for a in (0.1, 0.2):
            frac = float(np.mean(draws / n - 0.5 >= a - 1e-12))
            bound = math.exp(-2.0 * n * a * a)
            assert frac <= bound + 3.0 * math.sqrt(0.25 / trials)


# ---------------------------------------------------------------------------
# Serialization


def test_save_trace_steps_and_sidecar(tmp_path):
    m = generate_planted(3, 0.2, 0.3, seed=1)
    tr = run(m, 1.0, 50, seed=2, checkpoints=(10, 50), record_steps=True,
             audit_delta=0.5)
    csv_path, json_path = save_trace(tr, tmp_path / "run.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,i,j,winner,step_regret,cum_regret"
    assert len(lines) == 51
    last = lines[-1].split(",")
    assert int(last[0]) == 50
    assert float(last[5]) == tr.final_cum_regret

    side = json.loads(json_path.read_text())
    assert side["algorithm"] == "rucb"
    assert side["seed"] == 2
    assert side["alpha"] == 1.0
    assert side["rng"] == "pcg64:3-uniforms-per-step"
    assert side["checkpoint_ts"] == [10, 50]
    assert side["matrix_sha256"] == tr.matrix_hash
    assert side["audit"]["t_start"] == tr.audit.t_start
    assert side["audit"]["violated"] == tr.audit.violated


def test_save_trace_checkpoint_resolution(tmp_path):
    m = generate_planted(3, 0.2, 0.3, seed=1)
    tr = run(m, 1.0, 200, seed=2, checkpoints=(10, 100, 200))
    csv_path, _ = save_trace(tr, tmp_path / "cp.csv")
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 4
    assert [int(l.split(",")[0]) for l in lines[1:]] == [10, 100, 200]
    with pytest.raises(ValueError):
        save_trace(tr, tmp_path / "x.csv", resolution="steps")
    with pytest.raises(ValueError):
        save_trace(tr, tmp_path / "y.csv", resolution="bogus")


def test_random_pairing_sidecar_has_no_alpha(tmp_path):
    m = generate_planted(3, 0.2, 0.3, seed=1)
    tr = random_pairing_run(m, 40, seed=0)
    _, json_path = save_trace(tr, tmp_path / "rp.csv")
    side = json.loads(json_path.read_text())
    assert side["alpha"] is None
    assert side["rng"] == "pcg64:2-uniforms-per-step"
