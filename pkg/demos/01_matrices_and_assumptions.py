"""Generate preference matrices and inspect what structure they actually have.

A planted instance always has a Condorcet winner (arm 0 by construction),
but nothing stronger is promised: the losers' sub-tournament is random, so
a total ordering may or may not emerge.  The cyclic instance is the standard
counterexample where every arm loses to somebody and no winner exists at all.
"""

from pathlib import Path

import numpy as np

from duelband import (
    analyze_assumptions,
    gaps,
    generate_cycle,
    generate_planted,
    save_matrix,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def describe(name, matrix):
    rep = analyze_assumptions(matrix)
    print(f"{name}:")
    print(np.array_str(matrix.p, precision=3))
    print(f"  condorcet winner: {rep.condorcet}")
    print(f"  borda winner:     {rep.borda}")
    if rep.total_ordering_holds:
        order = " > ".join(map(str, rep.total_order))
        print(f"  total ordering:   {order}")
        print(f"  gamma (relaxed transitivity constant): {rep.gamma:.4f}")
        print(f"  strong transitivity: {rep.strong_transitivity_holds}")
    else:
        print("  total ordering:   none (cycles among the losers)")
    print()
    return rep


planted = generate_planted(k=6, delta_min=0.1, delta_max=0.3, seed=3)
describe("planted 6-arm matrix, seed 3 (rows beat columns with prob p[i, j])",
         planted)

g = gaps(planted)
print(f"gaps to the winner: {np.array_str(g.delta, precision=3)}")
print(f"hardest arm to separate: {int(np.argsort(g.delta)[1])} "
      f"(gap {np.sort(g.delta)[1]:.3f})\n")

# Same generator, different seed: the winner survives but the order does not.
describe("planted 6-arm matrix, seed 42", generate_planted(6, 0.1, 0.3, seed=42))

# The 3-cycle: 0 beats 1 beats 2 beats 0, all at 0.6.
describe("cyclic 3-arm matrix (no Condorcet winner, outside the model's "
         "assumptions)", generate_cycle(k=3))

save_matrix(planted, OUT / "planted6.csv")
print(f"wrote {OUT / 'planted6.csv'} (round-trips exactly via load_matrix)")
