"""Anatomy of a single run, at two zoom levels.

First the component API: drive the state by hand for a few steps to watch the
optimistic matrix pick champions and challengers.  Early on every arm looks
like a potential winner (untried pairs get an optimistic estimate above 1),
so the champion pool is the whole arm set and play is essentially random.

Then the batch API: one full run at horizon 50k with checkpoint snapshots,
saved to CSV next to a JSON sidecar that records the seed, the RNG
convention, and the matrix hash needed to reproduce it.
"""

from pathlib import Path

import numpy as np

from duelband import (
    DuelEnv,
    RucbState,
    gaps,
    generate_planted,
    log_checkpoints,
    optimistic_matrix,
    run,
    save_trace,
    select_pair,
    update,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

matrix = generate_planted(k=5, delta_min=0.15, delta_max=0.3, seed=11)
g = gaps(matrix)

rng = np.random.default_rng(5)
env = DuelEnv(matrix, rng)
state = RucbState.fresh(matrix.k, alpha=1.0)

print("first eight decisions (champion c, challenger d, duel winner):")
for _ in range(8):
    dec = select_pair(state, rng)
    out = env.duel(dec.c, dec.d)
    update(state, out)
    pool = ",".join(map(str, dec.champion_pool))
    print(f"  t={out.t:<2d} pool={{{pool}}} c={dec.c} d={dec.d} "
          f"winner={out.winner}")

u = optimistic_matrix(state).u
print("\noptimistic matrix after those steps (2.0 marks untried pairs):")
print(np.array_str(u, precision=3))

trace = run(matrix, alpha=1.0, horizon=50_000, seed=5,
            checkpoints=log_checkpoints(50_000))
print(f"\nfull run: final cumulative regret {trace.final_cum_regret:.1f}, "
      f"best-arm estimate {trace.final_best_arm} (true winner {g.winner})")
selfs = trace.final_self_duels
print(f"self-duels: {int(selfs.sum())} total, "
      f"{int(selfs[g.winner])} by the winner (it duels itself once it "
      f"dominates the pool)")

csv_path, json_path = save_trace(trace, OUT / "single_run.csv")
print(f"wrote {csv_path} and {json_path}")
