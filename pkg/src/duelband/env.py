"""Stochastic duel environment.

Wraps a validated preference matrix behind a seeded comparison oracle.  Each
call to :meth:`DuelEnv.duel` consumes exactly one uniform draw from the
underlying generator and advances the environment clock by one, so traces are
reproducible from (matrix, seed, query sequence) alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRangeError
from .preference import GapVector, PreferenceMatrix

__all__ = ["RNG_ALGORITHM", "DuelOutcome", "DuelEnv", "step_regret"]

# Identifier recorded in trace sidecars.  PCG64 via numpy's default_rng; one
# double per duel, drawn with Generator.random().
RNG_ALGORITHM = "pcg64"


@dataclass(frozen=True)
class DuelOutcome:
    """Result of one duel: the queried pair, the winner, and the timestep."""

    i: int
    j: int
    winner: int
    t: int


class DuelEnv:
    """Comparison oracle over a preference matrix.

    ``rng`` may be an integer seed (a fresh PCG64 stream is created) or an
    existing ``numpy.random.Generator`` to share a stream with the caller.
    The clock ``t`` counts completed duels, starting at 0.
    """

    def __init__(self, matrix: PreferenceMatrix, rng):
        self.matrix = matrix
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.t = 0

    def duel(self, i: int, j: int) -> DuelOutcome:
        """Run one duel between arms i and j.

        Arm i wins with probability ``p[i, j]``; a self-duel therefore always
        returns its own arm.  Exactly one uniform is consumed either way.
        """
        k = self.matrix.k
        if not (0 <= i < k and 0 <= j < k):
            raise IndexOutOfRangeError(f"pair ({i}, {j}) outside [0, {k})")
        u = self.rng.random()
        winner = i if u < self.matrix.p[i, j] else j
        self.t += 1
        return DuelOutcome(i=i, j=j, winner=winner, t=self.t)


def step_regret(g: GapVector, i: int, j: int) -> float:
    """Average of the two arms' gaps; zero iff both are the winner."""
    return 0.5 * (g.delta[i] + g.delta[j])
