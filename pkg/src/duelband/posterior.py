"""Beta-posterior tail oracles and lemma verifiers.

Setting: n Bernoulli(p) observations under a uniform Beta(1, 1) prior.  With s
observed successes the posterior on the success parameter is
Beta(s+1, n-s+1); marginalizing the posterior tail over the binomial law of s
gives the quantity the tail lemmas are about.

Everything here reduces to finite binomial sums, evaluated without special
functions:

* ``beta_tail`` uses the identity P(theta > x) = P(Bin(n+1, x) <= s) for
  theta ~ Beta(s+1, n-s+1),
* ``marginalized_tail`` mixes those tails with Bin(n, p) weights,
* ``binomial_mix_tail`` convolves Bin(n_x, p) with Bin(n_y, 1/2) exactly.

Binomial pmfs come from a mode-anchored multiplicative recurrence followed by
normalization, so no entry under- or overflows on the way to its final value.
Tail sums always accumulate the light side of the distribution (complementing
when the heavy side is requested); since the peak entry of an L-point pmf is
at least 1/L, every returned probability provably lands in [0, 1] without
clipping.

The ``verify_*`` functions sweep the tail-lemma inequalities over grids and
raise :class:`~duelband.errors.VerificationFailure` with a witness on the
first broken case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, VerificationFailure

__all__ = [
    "VerificationReport",
    "beta_tail",
    "beta_cdf",
    "marginalized_tail",
    "binomial_mix_tail",
    "verify_beta_estimate",
    "verify_tail_shrinkage",
    "verify_envelope",
]

_DEFAULT_GRID = tuple(np.linspace(0.05, 0.95, 19))
_DEFAULT_GRID_BELOW_HALF = tuple(np.linspace(0.05, 0.45, 9))


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one lemma sweep.

    ``max_deviation`` is the largest |lhs - rhs| seen across equality checks
    (0.0 when the sweep has none); ``min_margin`` is the smallest slack seen
    across inequality checks (inf when none); ``worst`` records the inputs at
    whichever extreme the report tracks.
    """

    name: str
    cases: int
    max_deviation: float
    min_margin: float
    worst: tuple | None


def _binom_pmf(n: int, p: float) -> np.ndarray:
    """pmf of Bin(n, p) over 0..n via a mode-anchored recurrence.

    The unnormalized values start at 1 at the mode and follow
    pmf(s+1)/pmf(s) = (n-s)/(s+1) * p/(1-p) outward in both directions, then
    the whole vector is normalized by its exact (fsum) total.  Entries far
    from the mode flush to zero gracefully instead of poisoning the rest, so
    the recurrence is stable for any p in [0, 1].
    """
    if p == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    v = np.zeros(n + 1)
    mode = int((n + 1) * p)
    if mode > n:
        mode = n
    v[mode] = 1.0
    odds = p / (1.0 - p)
    for s in range(mode, n):
        v[s + 1] = v[s] * ((n - s) / (s + 1.0)) * odds
    for s in range(mode, 0, -1):
        v[s - 1] = v[s] * (s / (n - s + 1.0)) / odds
    return v / math.fsum(v)


def _tail_sum(pmf: np.ndarray, k: int) -> float:
    """P(V >= k) for a pmf vector, summing the light side only.

    For k at or below the argmax the head is summed and complemented; above
    it the tail is summed directly.  Either way the accumulated mass misses
    the peak entry (>= 1/len), which keeps the float result inside [0, 1]
    without any clipping.
    """
    if k <= 0:
        return 1.0
    if k >= len(pmf):
        return 0.0
    peak = int(np.argmax(pmf))
    if k <= peak:
        return 1.0 - math.fsum(pmf[:k])
    return math.fsum(pmf[k:])


def _head_sum(pmf: np.ndarray, s: int) -> float:
    """P(V <= s), mirroring the light-side rule of :func:`_tail_sum`."""
    if s < 0:
        return 0.0
    if s >= len(pmf) - 1:
        return 1.0
    peak = int(np.argmax(pmf))
    if s < peak:
        return math.fsum(pmf[: s + 1])
    return 1.0 - math.fsum(pmf[s + 1 :])


def _check_prob(name: str, x: float, open_interval: bool) -> None:
    ok = 0.0 < x < 1.0 if open_interval else 0.0 <= x <= 1.0
    if not ok:
        rng = "(0, 1)" if open_interval else "[0, 1]"
        raise DomainError(f"{name} = {x!r} outside {rng}")


def beta_tail(s: int, n: int, threshold: float) -> float:
    """P(theta > threshold) for theta ~ Beta(s+1, n-s+1).

    Evaluated through the finite sum P(Bin(n+1, threshold) <= s); requires
    0 <= s <= n and threshold in (0, 1).
    """
    if not (0 <= s <= n):
        raise DomainError(f"need 0 <= s <= n, got s={s}, n={n}")
    _check_prob("threshold", threshold, open_interval=True)
    return _head_sum(_binom_pmf(n + 1, threshold), s)


def beta_cdf(s: int, n: int, threshold: float) -> float:
    """P(theta <= threshold), the complement of :func:`beta_tail`."""
    if not (0 <= s <= n):
        raise DomainError(f"need 0 <= s <= n, got s={s}, n={n}")
    _check_prob("threshold", threshold, open_interval=True)
    return _tail_sum(_binom_pmf(n + 1, threshold), s + 1)


def _beta_tail_vector(n: int, threshold: float) -> np.ndarray:
    """beta_tail(s, n, threshold) for every s = 0..n at once."""
    pmf = _binom_pmf(n + 1, threshold)
    cdf = np.cumsum(pmf)
    return cdf[: n + 1]


def marginalized_tail(n: int, p: float, threshold: float) -> float:
    """Tail of the marginalized posterior after n Bernoulli(p) draws.

    Mixes beta_tail(s, n, threshold) over the Bin(n, p) distribution of the
    success count s.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    _check_prob("p", p, open_interval=True)
    _check_prob("threshold", threshold, open_interval=True)
    weights = _binom_pmf(n, p)
    tails = _beta_tail_vector(n, threshold)
    return math.fsum(weights * tails)


def binomial_mix_tail(n_x: int, p: float, n_y: int, k: int) -> float:
    """Exact P(Bin(n_x, p) + Bin(n_y, 1/2) >= k) by full convolution."""
    if n_x < 0 or n_y < 0:
        raise DomainError(f"need n_x, n_y >= 0, got {n_x}, {n_y}")
    _check_prob("p", p, open_interval=False)
    conv = np.convolve(_binom_pmf(n_x, p), _binom_pmf(n_y, 0.5))
    return _tail_sum(conv, k)


# ---------------------------------------------------------------------------
# lemma verifiers
# ---------------------------------------------------------------------------

def _require_below_half(p_grid) -> list[float]:
    grid = [float(p) for p in p_grid]
    for p in grid:
        if not (0.0 < p < 0.5):
            raise DomainError(f"grid value p = {p!r} is not in (0, 1/2)")
    return grid


def verify_beta_estimate(
    n_max: int = 50,
    p_grid=_DEFAULT_GRID,
    tol: float = 1e-12,
) -> VerificationReport:
    """Check the binomial-sum identity and its sandwich on a grid.

    For every n <= n_max and p in the grid:

    * equality  |marginalized_tail(n, p, 1/2) - P(Bin(n,p)+Bin(n+1,1/2) >= n+1)| <= tol,
    * sandwich  P(Bin(n,p)+Bin(n,1/2) >= n+1) <= marginalized <= P(Bin(n+1,p)+Bin(n+1,1/2) >= n+1).
    """
    cases = 0
    max_dev = 0.0
    min_margin = math.inf
    worst = None
    for p in p_grid:
        p = float(p)
        for n in range(n_max + 1):
            marg = marginalized_tail(n, p, 0.5)
            mix = binomial_mix_tail(n, p, n + 1, n + 1)
            dev = abs(marg - mix)
            if dev > tol:
                raise VerificationFailure(
                    "beta-estimate equality",
                    {"n": n, "p": p, "lhs": marg, "rhs": mix},
                )
            lo = binomial_mix_tail(n, p, n, n + 1)
            hi = binomial_mix_tail(n + 1, p, n + 1, n + 1)
            if lo > marg:
                raise VerificationFailure(
                    "beta-estimate sandwich lower",
                    {"n": n, "p": p, "lhs": lo, "rhs": marg},
                )
            if marg > hi:
                raise VerificationFailure(
                    "beta-estimate sandwich upper",
                    {"n": n, "p": p, "lhs": marg, "rhs": hi},
                )
            cases += 1
            if dev > max_dev:
                max_dev = dev
                worst = (n, p)
            min_margin = min(min_margin, marg - lo, hi - marg)
    return VerificationReport(
        name="beta-estimate",
        cases=cases,
        max_deviation=max_dev,
        min_margin=min_margin,
        worst=worst,
    )


def verify_tail_shrinkage(
    n_max: int = 200,
    p_grid=_DEFAULT_GRID_BELOW_HALF,
    rel_margin: float = 1e-13,
) -> VerificationReport:
    """Check that the marginalized tail strictly decreases in n for p < 1/2.

    Strictness is measured relative to the current value:
    tail(n) - tail(n+1) > rel_margin * tail(n).  A relative margin is the
    right scale here because the tails themselves decay exponentially, while
    rounding noise in their evaluation is relative to magnitude; an absolute
    margin would be unmeetable once the tails drop below it.
    """
    grid = _require_below_half(p_grid)
    cases = 0
    min_margin = math.inf
    worst = None
    for p in grid:
        prev = marginalized_tail(0, p, 0.5)
        for n in range(n_max):
            cur = marginalized_tail(n + 1, p, 0.5)
            margin = (prev - cur) / prev if prev > 0.0 else -math.inf
            if margin <= rel_margin:
                raise VerificationFailure(
                    "tail-shrinkage",
                    {"n": n, "p": p, "lhs": cur, "rhs": prev},
                )
            cases += 1
            if margin < min_margin:
                min_margin = margin
                worst = (n, p)
            prev = cur
    return VerificationReport(
        name="tail-shrinkage",
        cases=cases,
        max_deviation=0.0,
        min_margin=min_margin,
        worst=worst,
    )


def verify_envelope(
    n_max: int = 200,
    p_grid=_DEFAULT_GRID_BELOW_HALF,
    log_slack: float = 1e-9,
) -> VerificationReport:
    """Check the geometric/exponential envelope around the posterior tail.

    With X_i ~ Bernoulli(p), Y_i ~ Bernoulli(1/2) and Delta = 1/2 - p, the
    equal-length chain (n_x = n_y = n) is

        (p/2)^n  <=  P(sum >= n+1)  <  P(sum >= n)  <=  exp(-n Delta^2 / 2),

    and combining it with the sandwich of verify_beta_estimate gives the
    envelope on the marginalized tail itself:

        (p/2)^n <= sandwich lower <= tail <= sandwich upper <= exp(-(n+1) Delta^2 / 2).

    Geometric lower bounds are compared in log-space (with ``log_slack``
    absorbing evaluation noise at n = 1, where the bound is tight) so that
    (p/2)^n never underflows into a vacuous comparison.
    """
    grid = _require_below_half(p_grid)
    cases = 0
    min_margin = math.inf
    worst = None

    def _fail(name, n, p, lhs, rhs):
        raise VerificationFailure(name, {"n": n, "p": p, "lhs": lhs, "rhs": rhs})

    for p in grid:
        delta = 0.5 - p
        log_geo_unit = math.log(p / 2.0)
        for n in range(1, n_max + 1):
            log_geo = n * log_geo_unit
            eq_hi = binomial_mix_tail(n, p, n, n)
            eq_lo = binomial_mix_tail(n, p, n, n + 1)
            marg = marginalized_tail(n, p, 0.5)
            hi_mix = binomial_mix_tail(n + 1, p, n + 1, n + 1)

            if eq_lo <= 0.0 or log_geo > math.log(eq_lo) + log_slack:
                _fail("envelope geometric lower", n, p, log_geo, math.log(eq_lo))
            if not eq_lo < eq_hi:
                _fail("envelope strict middle", n, p, eq_lo, eq_hi)
            hoeff = math.exp(-n * delta * delta / 2.0)
            if eq_hi > hoeff:
                _fail("envelope exponential upper", n, p, eq_hi, hoeff)
            if eq_lo > marg or marg > hi_mix:
                _fail("envelope sandwich", n, p, eq_lo, hi_mix)
            if marg <= 0.0 or log_geo > math.log(marg) + log_slack:
                _fail("envelope marginalized lower", n, p, log_geo, math.log(marg))
            hoeff1 = math.exp(-(n + 1) * delta * delta / 2.0)
            if hi_mix > hoeff1:
                _fail("envelope marginalized upper", n, p, hi_mix, hoeff1)

            cases += 1
            m = min(eq_hi - eq_lo, hoeff - eq_hi, hoeff1 - hi_mix)
            if m < min_margin:
                min_margin = m
                worst = (n, p)
    return VerificationReport(
        name="envelope",
        cases=cases,
        max_deviation=0.0,
        min_margin=min_margin,
        worst=worst,
    )
