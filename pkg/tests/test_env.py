"""Duel environment: determinism, win-rate statistics, regret."""

import numpy as np
import pytest

from duelband.env import DuelEnv, step_regret
from duelband.errors import IndexOutOfRangeError
from duelband.preference import gaps, validate


def test_certain_duel_always_returns_stronger_arm():
    env = DuelEnv(validate([[0.5, 1.0], [0.0, 0.5]]), rng=0)
    for _ in range(50):
        assert env.duel(0, 1).winner == 0
    # order of the query must not matter for who is stronger
    for _ in range(50):
        assert env.duel(1, 0).winner == 0


def test_self_duel_returns_own_arm_and_advances_clock():
    env = DuelEnv(validate([[0.5, 0.7], [0.3, 0.5]]), rng=5)
    out = env.duel(1, 1)
    assert out.winner == 1
    assert out.t == 1
    assert env.duel(0, 0).winner == 0
    assert env.t == 2


def test_clock_counts_every_duel():
    env = DuelEnv(validate([[0.5, 0.7], [0.3, 0.5]]), rng=5)
    for expect in range(1, 21):
        assert env.duel(0, 1).t == expect


def test_seeded_win_rate_concentrates():
    env = DuelEnv(validate([[0.5, 0.7], [0.3, 0.5]]), rng=12345)
    n = 10**6
    wins = sum(env.duel(0, 1).winner == 0 for _ in range(n))
    assert wins / n == pytest.approx(0.7, abs=0.002)


def test_same_seed_same_outcomes():
    m = validate([[0.5, 0.55, 0.8], [0.45, 0.5, 0.6], [0.2, 0.4, 0.5]])
    queries = [(0, 1), (1, 2), (2, 0), (0, 2), (1, 0), (2, 2)]
    a = DuelEnv(m, rng=99)
    b = DuelEnv(m, rng=99)
    for i, j in queries * 100:
        assert a.duel(i, j).winner == b.duel(i, j).winner


def test_env_consumes_exactly_one_draw_per_duel():
    m = validate([[0.5, 0.7], [0.3, 0.5]])
    rng = np.random.default_rng(4242)
    mirror = np.random.default_rng(4242)
    env = DuelEnv(m, rng=rng)
    for _ in range(200):
        u = mirror.random()
        out = env.duel(0, 1)
        assert out.winner == (0 if u < 0.7 else 1)


def test_index_bounds_checked():
    env = DuelEnv(validate([[0.5, 0.7], [0.3, 0.5]]), rng=0)
    with pytest.raises(IndexOutOfRangeError):
        env.duel(0, 2)
    with pytest.raises(IndexOutOfRangeError):
        env.duel(-1, 0)


def test_step_regret_values():
    g = gaps(validate([[0.5, 0.8, 0.7], [0.2, 0.5, 0.6], [0.3, 0.4, 0.5]]))
    assert step_regret(g, 0, 0) == 0.0
    assert step_regret(g, 1, 2) == pytest.approx(0.25, abs=1e-12)
    assert step_regret(g, 2, 1) == pytest.approx(0.25, abs=1e-12)
    assert step_regret(g, 0, 2) == pytest.approx(0.1, abs=1e-12)
    assert step_regret(g, 1, 2) == step_regret(g, 2, 1)
