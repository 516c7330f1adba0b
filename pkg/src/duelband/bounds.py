"""Closed-form regret and count bounds for relative-UCB dueling bandits.

Conventions: arms are indexed from 0 and the Condorcet winner is ``w``; the
gap of arm i is ``delta[i] = p[w, i] - 1/2`` (zero exactly for the winner).
The confidence-horizon constant is

    C(delta) = ((4 alpha - 1) K^2 / ((2 alpha - 1) delta))^(1 / (2 alpha - 1)),

the per-pair count coefficient is ``D[i, j] = 4 alpha / min_pos^2`` with
``min_pos`` the smallest strictly positive gap of the pair (the winner's zero
gap never enters the min: a literal min would put zero in the denominator for
the winner's own pairs, and the count argument only ever needs the loser's
gap), and the two regret curves are

    high-probability:  C(delta) Delta* + sum_{i>j} D_ij Delta_ij ln t,
    expected:          Delta* L (2a-1)/(2a-2) + sum_{i>j} 2a (D_i + D_j)/min_pos^2 ln t,

with ``Delta_ij = (delta_i + delta_j)/2`` and ``L = C(delta) at delta = 1``
without the confidence division, valid for alpha > 1.  The expected-regret
constant is the exact value of the integral of C(1 - q) over q in [0, 1];
``c_delta_mean_quadrature`` recomputes it numerically as a cross-check.

At the small alphas used in experiments (alpha just above 1/2), the exponent
1/(2 alpha - 1) makes C(delta) astronomically large; everything here is
evaluated through logarithms first so the calculators still report such
values (possibly as inf) instead of overflowing mid-expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    AlphaNotGreaterThanOneError,
    AlphaTooSmallError,
    DomainError,
    ZeroGapError,
)
from .preference import GapVector

__all__ = [
    "BoundParams",
    "gaps_from_deltas",
    "c_delta",
    "c_delta_log",
    "c_delta_mean",
    "c_delta_mean_quadrature",
    "d_matrix",
    "high_prob_regret_curve",
    "expected_regret_bound",
    "kl_bernoulli",
    "kl_sandwich_check",
]


@dataclass(frozen=True)
class BoundParams:
    """Everything the bound formulas need: alpha, K, confidence, gaps."""

    alpha: float
    k: int
    delta: float
    gaps: GapVector

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise AlphaTooSmallError(f"alpha must exceed 1/2, got {self.alpha}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.gaps.delta) != self.k:
            raise ValueError(
                f"gap vector has {len(self.gaps.delta)} entries for k={self.k}"
            )


def gaps_from_deltas(deltas) -> GapVector:
    """Build a GapVector from an explicit gap list.

    Exactly one entry must be zero (the winner); the rest must be positive.
    Convenient when the caller knows the gaps but has no matrix at hand.
    """
    d = np.asarray(deltas, dtype=float)
    zero = np.flatnonzero(d == 0.0)
    if len(zero) != 1:
        raise ZeroGapError(f"need exactly one zero gap, got {len(zero)}")
    if (d < 0.0).any() or not (np.delete(d, zero[0]) > 0.0).all():
        raise ZeroGapError("all non-winner gaps must be strictly positive")
    star = float(np.delete(d, zero[0]).max()) if len(d) > 1 else 0.0
    return GapVector(winner=int(zero[0]), delta=d, delta_star=star)


def c_delta_log(p: BoundParams) -> float:
    """Natural log of C(delta); finite even when C itself overflows."""
    num = math.log(4.0 * p.alpha - 1.0) + 2.0 * math.log(p.k)
    den = math.log(2.0 * p.alpha - 1.0) + math.log(p.delta)
    return (num - den) / (2.0 * p.alpha - 1.0)


def c_delta(p: BoundParams) -> float:
    """The confidence horizon C(delta); inf when it exceeds float range."""
    lg = c_delta_log(p)
    if lg > 709.0:
        return math.inf
    base = (4.0 * p.alpha - 1.0) * p.k * p.k / ((2.0 * p.alpha - 1.0) * p.delta)
    return base ** (1.0 / (2.0 * p.alpha - 1.0))


def c_delta_mean(p: BoundParams) -> float:
    """Closed form of the integral of C(1 - q) dq over q in [0, 1].

    Equals L * (2 alpha - 1)/(2 alpha - 2) with L the delta-free part of C;
    this is the additive constant of the expected-regret bound before the
    Delta* factor.  Requires alpha > 1 (the integral diverges otherwise).
    """
    if not p.alpha > 1.0:
        raise AlphaNotGreaterThanOneError(
            f"expected-regret constant needs alpha > 1, got {p.alpha}"
        )
    a = p.alpha
    lg = (math.log(4.0 * a - 1.0) + 2.0 * math.log(p.k) - math.log(2.0 * a - 1.0)) / (
        2.0 * a - 1.0
    )
    if lg > 709.0:
        return math.inf
    big_l = ((4.0 * a - 1.0) * p.k * p.k / (2.0 * a - 1.0)) ** (1.0 / (2.0 * a - 1.0))
    return big_l * (2.0 * a - 1.0) / (2.0 * a - 2.0)


def c_delta_mean_quadrature(p: BoundParams, rel_tol: float = 1e-6) -> float:
    """Numerical integral of C(1 - q) over [0, 1], for cross-checking."""
    if not p.alpha > 1.0:
        raise AlphaNotGreaterThanOneError(
            f"expected-regret constant needs alpha > 1, got {p.alpha}"
        )

    def integrand(q):
        return c_delta(BoundParams(alpha=p.alpha, k=p.k, delta=1.0 - q, gaps=p.gaps))

    # The integrand blows up like (1-q)^(-1/(2a-1)) at q = 1; that power is
    # < 1 for alpha > 1, so the integral converges and quad handles the
    # endpoint singularity given the hint.
    val, _ = quad(integrand, 0.0, 1.0, points=[1.0], epsrel=rel_tol, limit=200)
    return val


def _positive_pair_min(di: float, dj: float, i: int, j: int) -> float:
    cand = [d for d in (di, dj) if d > 0.0]
    if not cand:
        raise ZeroGapError(f"pair ({i}, {j}) has no positive gap")
    return min(cand)


def d_matrix(p: BoundParams) -> np.ndarray:
    """Count coefficients D[i, j] = 4 alpha / min positive gap squared.

    Diagonal entries are zero by definition.  A zero gap on a non-winner arm
    means the instance has ties against the winner and the coefficients are
    undefined (ZeroGapError).
    """
    delta = p.gaps.delta
    w = p.gaps.winner
    for i in range(p.k):
        if i != w and not delta[i] > 0.0:
            raise ZeroGapError(f"non-winner arm {i} has gap {delta[i]!r}")
    out = np.zeros((p.k, p.k))
    for i in range(p.k):
        for j in range(i + 1, p.k):
            g = _positive_pair_min(delta[i], delta[j], i, j)
            out[i, j] = out[j, i] = 4.0 * p.alpha / (g * g)
    return out


def _log_sum_coefficient(p: BoundParams) -> float:
    """sum over pairs i > j of D_ij * Delta_ij."""
    delta = p.gaps.delta
    d = d_matrix(p)
    total = 0.0
    for i in range(p.k):
        for j in range(i + 1, p.k):
            total += d[i, j] * 0.5 * (delta[i] + delta[j])
    return total


def high_prob_regret_curve(p: BoundParams, t):
    """High-probability regret bound at time(s) t >= 1.

    Accepts a scalar or array; holds for each run with probability at least
    1 - delta.
    """
    ts = np.asarray(t, dtype=float)
    if (ts < 1.0).any():
        raise ValueError("bound curves are defined for t >= 1")
    out = c_delta(p) * p.gaps.delta_star + _log_sum_coefficient(p) * np.log(ts)
    return float(out) if out.ndim == 0 else out


def expected_regret_bound(p: BoundParams, t):
    """Expected-regret bound at time(s) t >= 1; requires alpha > 1."""
    if not p.alpha > 1.0:
        raise AlphaNotGreaterThanOneError(
            f"expected-regret bound needs alpha > 1, got {p.alpha}"
        )
    ts = np.asarray(t, dtype=float)
    if (ts < 1.0).any():
        raise ValueError("bound curves are defined for t >= 1")
    delta = p.gaps.delta
    coeff = 0.0
    for i in range(p.k):
        for j in range(i + 1, p.k):
            g = _positive_pair_min(delta[i], delta[j], i, j)
            coeff += 2.0 * p.alpha * (delta[i] + delta[j]) / (g * g)
    out = p.gaps.delta_star * c_delta_mean(p) + coeff * np.log(ts)
    return float(out) if out.ndim == 0 else out


def kl_bernoulli(a: float, b: float) -> float:
    """KL divergence between Bernoulli(a) and Bernoulli(b)."""
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise DomainError(f"kl defined on (0,1)^2, got ({a!r}, {b!r})")
    return a * math.log(a / b) + (1.0 - a) * math.log((1.0 - a) / (1.0 - b))


def kl_sandwich_check(g: GapVector) -> bool:
    """Whether 2 delta_i^2 <= kl(p_wi, 1/2) <= 4 delta_i^2 for all non-winners."""
    for i, d in enumerate(g.delta):
        if i == g.winner:
            continue
        kl = kl_bernoulli(0.5 + d, 0.5)
        if not (2.0 * d * d <= kl <= 4.0 * d * d):
            return False
    return True
