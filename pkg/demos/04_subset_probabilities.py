"""How likely is a random subset of arms to contain its own Condorcet winner?

For a fixed tournament (who beats whom), the count of m-subsets with an
internal all-beater has a closed form over the full-set win counts, so that
probability is exact.  Total ordering of the subset is strictly stronger;
for it we fall back to Monte Carlo.  Three tournaments, from most to least
structured: a perfect ranking, a planted winner over a random field, and a
pure cycle.
"""

import numpy as np

from duelband import (
    beat_relation,
    condorcet_subset_probability,
    generate_cycle,
    generate_planted,
    total_ordering_probability_mc,
)

K = 12
SAMPLES = 20_000


def table(name, beats, sizes):
    print(f"{name}:")
    print(f"  {'size':>4} {'P(condorcet winner)':>20} {'P(total order), MC':>19}")
    for m in sizes:
        exact = condorcet_subset_probability(beats, m)
        mc = total_ordering_probability_mc(beats, m, samples=SAMPLES, seed=0)
        print(f"  {m:>4d} {exact:>20.6f} {mc:>19.4f}")
    print()


# Arm i beats arm j whenever i < j: every subset is internally ranked.
ranked = np.triu(np.ones((K, K), dtype=bool), k=1)
table("perfect ranking", ranked, (2, 4, 8, 12))

# Planted: arm 0 beats everyone, the rest is a random sub-tournament.  Any
# subset containing arm 0 has a winner for free, which keeps the exact
# column high, while total ordering dies fast.
planted = beat_relation(generate_planted(K, 0.05, 0.45, seed=9))
print("planted full-set win counts:", planted.sum(axis=1).tolist())
table("planted winner, random field", planted, range(1, K + 1))

# The 3-cycle has no winner at full size and orders nothing but pairs.
cyc = beat_relation(generate_cycle(3))
table("3-cycle", cyc, (1, 2, 3))
