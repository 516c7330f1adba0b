"""Mean regret against the finite-time theory curves.

Thirty runs on an 8-arm instance, aggregated at log-spaced checkpoints and
plotted (when matplotlib is around) against the high-probability curve and
the expected-regret bound.  Both bounds hold with lots of slack; the point
of the picture is the shape: after the exploration transient the mean grows
linearly in ln t.
"""

from pathlib import Path

import numpy as np

from duelband import (
    BoundParams,
    expected_regret_bound,
    gaps,
    generate_planted,
    high_prob_regret_curve,
    log_checkpoints,
    run,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

HORIZON = 30_000
ALPHA = 2.0
RUNS = 30

matrix = generate_planted(k=8, delta_min=0.12, delta_max=0.4, seed=3)
g = gaps(matrix)
cps = log_checkpoints(HORIZON, count=15)

traces = [run(matrix, ALPHA, HORIZON, seed=200 + r, checkpoints=cps)
          for r in range(RUNS)]
regret = np.stack([t.checkpoints.cum_regret for t in traces])
mean_r = regret.mean(axis=0)

ts = np.asarray(cps, dtype=float)
params = BoundParams(alpha=ALPHA, k=matrix.k, delta=0.05, gaps=g)
hp = high_prob_regret_curve(params, ts)
eb = expected_regret_bound(params, ts)

print(f"{'t':>8} {'mean':>10} {'min':>10} {'max':>10} {'hp bound':>12} "
      f"{'exp bound':>12}")
for idx, t in enumerate(cps):
    print(f"{t:>8d} {mean_r[idx]:>10.1f} {regret[:, idx].min():>10.1f} "
          f"{regret[:, idx].max():>10.1f} {hp[idx]:>12.1f} {eb[idx]:>12.1f}")

acc = np.mean([t.final_best_arm == g.winner for t in traces])
print(f"\nfinal best-arm accuracy over {RUNS} runs: {acc:.2f}")

rows = np.column_stack([ts, mean_r, regret.min(axis=0), regret.max(axis=0),
                        hp, eb])
np.savetxt(OUT / "regret_vs_bounds.csv", rows, delimiter=",",
           header="t,mean,min,max,high_prob_bound,expected_bound", comments="")
print(f"wrote {OUT / 'regret_vs_bounds.csv'}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.fill_between(ts, regret.min(axis=0), regret.max(axis=0), alpha=0.25,
                    label="run envelope")
    ax.plot(ts, mean_r, marker="o", label="mean regret")
    ax.plot(ts, hp, linestyle="--", label="high-prob curve (delta=0.05)")
    ax.plot(ts, eb, linestyle=":", label="expected bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "regret_vs_bounds.png", dpi=120)
    print(f"wrote {OUT / 'regret_vs_bounds.png'}")
