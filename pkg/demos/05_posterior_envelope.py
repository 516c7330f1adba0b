"""Posterior tail decay and the bounds that sandwich it.

The quantity driving convergence proofs: after n duels against a coin of
bias p < 1/2, how likely is a Beta posterior sample to still sit above 1/2?
Exactly computable, strictly shrinking in n, and squeezed between a
geometric lower bound and a Chernoff-style exponential upper bound.
"""

import math
from pathlib import Path

from duelband import (
    marginalized_tail,
    verify_beta_estimate,
    verify_envelope,
    verify_tail_shrinkage,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

print(f"{'n':>4} {'(p/2)^n':>12} {'tail(n, p)':>12} {'exp bound':>12}"
      f"   (p = 0.3)")
p = 0.3
delta = 0.5 - p
rows = []
for n in (1, 2, 5, 10, 20, 40, 80, 160):
    tail = marginalized_tail(n, p, 0.5)
    lo = (p / 2.0) ** n
    hi = math.exp(-(n + 1) * delta * delta / 2.0)
    print(f"{n:>4d} {lo:>12.3e} {tail:>12.3e} {hi:>12.3e}")
    rows.append((n, lo, tail, hi))

with open(OUT / "posterior_envelope.csv", "w") as fh:
    fh.write("n,geometric_lower,tail,exponential_upper\n")
    for n, lo, tail, hi in rows:
        fh.write(f"{n},{lo!r},{tail!r},{hi!r}\n")
print(f"\nwrote {OUT / 'posterior_envelope.csv'}")

# The sweeps raise on any counterexample; the reports carry the margins.
eq = verify_beta_estimate(n_max=50)
sh = verify_tail_shrinkage(n_max=200)
env = verify_envelope(n_max=200)
print(f"\nbinomial-sum identity: {eq.cases} cases, "
      f"max deviation {eq.max_deviation:.2e}")
print(f"strict shrinkage:      {sh.cases} cases, "
      f"min relative decrease {sh.min_margin:.2e}")
print(f"envelope:              {env.cases} cases, "
      f"min margin {env.min_margin:.2e}")
