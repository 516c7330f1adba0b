"""Preference matrices for dueling bandits.

A problem instance on K arms is a matrix P with entries ``p[i, j]`` giving the
probability that arm i wins a duel against arm j.  Throughout the package a
valid matrix satisfies, exactly:

* ``p[i, j] + p[j, i] == 1`` for every pair,
* ``p[i, i] == 0.5`` on the diagonal.

``validate`` accepts raw data that honours these only up to a tolerance and
renormalizes it so the identities hold bit-for-bit: the upper triangle is
taken as authoritative and the lower triangle is rewritten as ``1 - p[i, j]``.

The module also hosts the instance-level diagnostics: Condorcet and Borda
winners, the gap vector that defines regret, total-ordering and transitivity
checks, tournament combinatorics for the probability that a random subset of
arms keeps a Condorcet winner, and seeded generators for synthetic instances.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DiagonalViolationError,
    EntryOutOfRangeError,
    InvalidGapRangeError,
    NoCondorcetWinnerError,
    NonSquareError,
    SkewViolationError,
    SubsetTooLargeError,
)

__all__ = [
    "TOL",
    "PreferenceMatrix",
    "GapVector",
    "AssumptionReport",
    "validate",
    "condorcet_winner",
    "borda_winner",
    "gaps",
    "beat_relation",
    "analyze_assumptions",
    "condorcet_subset_count",
    "condorcet_subset_probability",
    "total_ordering_probability_mc",
    "generate_planted",
    "generate_cycle",
    "load_matrix",
    "save_matrix",
    "matrix_sha256",
]

# Tolerance for accepting raw input as "meant to be" consistent.  After
# validation the identities hold exactly, so downstream code never needs it.
TOL = 1e-9


@dataclass(frozen=True)
class PreferenceMatrix:
    """A validated K x K preference matrix.

    ``p`` is a read-only float64 array with exact skew-symmetry around 1/2.
    Instances should be built through :func:`validate` (or the loaders), which
    is the only place the consistency checks live.
    """

    k: int
    p: np.ndarray

    def __post_init__(self):
        self.p.setflags(write=False)


@dataclass(frozen=True)
class GapVector:
    """Per-arm regret gaps relative to the Condorcet winner.

    ``delta[i]`` is ``p[winner, i] - 1/2``; the winner's own entry is exactly
    zero and every other entry is strictly positive.  ``delta_star`` is the
    largest gap (0.0 for a single arm).
    """

    winner: int
    delta: np.ndarray
    delta_star: float

    def __post_init__(self):
        self.delta.setflags(write=False)


@dataclass(frozen=True)
class AssumptionReport:
    """What structure an instance actually has.

    ``total_order`` lists the arms from best to worst when the sort-by-wins
    candidate ordering is consistent with every pairwise majority, else None.
    ``gamma`` is the smallest relaxed-transitivity constant for that order
    (clamped to at least 1), None when no total order exists.
    """

    condorcet: int | None
    borda: int
    total_ordering_holds: bool
    total_order: tuple[int, ...] | None
    gamma: float | None
    strong_transitivity_holds: bool


def validate(raw) -> PreferenceMatrix:
    """Check raw preference data and renormalize it into exact form.

    Raises NonSquareError, EntryOutOfRangeError, SkewViolationError or
    DiagonalViolationError, in that order of precedence.  All approximate
    comparisons use ``TOL``; the returned matrix is exact (see module notes).
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
    k = arr.shape[0]
    if k == 0:
        raise NonSquareError("matrix must have at least one arm")
    bad = ~((arr >= 0.0) & (arr <= 1.0))  # catches NaN as well
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise EntryOutOfRangeError(f"p[{i},{j}] = {arr[i, j]!r} is not in [0, 1]")
    skew = np.abs(arr + arr.T - 1.0)
    np.fill_diagonal(skew, 0.0)
    if (skew > TOL).any():
        i, j = np.argwhere(skew > TOL)[0]
        raise SkewViolationError(
            f"p[{i},{j}] + p[{j},{i}] = {arr[i, j] + arr[j, i]!r} deviates from 1"
        )
    diag = np.abs(np.diagonal(arr) - 0.5)
    if (diag > TOL).any():
        i = int(np.argmax(diag > TOL))
        raise DiagonalViolationError(f"p[{i},{i}] = {arr[i, i]!r} deviates from 1/2")

    out = np.empty((k, k), dtype=float)
    np.fill_diagonal(out, 0.5)
    iu, ju = np.triu_indices(k, 1)
    out[iu, ju] = arr[iu, ju]
    out[ju, iu] = 1.0 - arr[iu, ju]
    return PreferenceMatrix(k=k, p=out)


def condorcet_winner(m: PreferenceMatrix) -> int | None:
    """Index of the arm beating every other arm outright, or None.

    Requires strict ``p[i, j] > 1/2`` against all j != i; at most one arm can
    qualify.  A single arm wins vacuously.
    """
    p = m.p
    for i in range(m.k):
        row = np.delete(p[i], i)
        if (row > 0.5).all():
            return i
    return None


def borda_winner(m: PreferenceMatrix) -> int:
    """Arm with the largest row sum, lowest index on ties.

    Row sums are accumulated with ``math.fsum`` so that ties between rows
    holding the same multiset of entries (cycles, symmetric instances) are
    exact rather than at the mercy of summation order.
    """
    sums = [math.fsum(m.p[i]) for i in range(m.k)]
    best = max(sums)
    return sums.index(best)


def gaps(m: PreferenceMatrix) -> GapVector:
    """Gap vector relative to the Condorcet winner.

    Raises NoCondorcetWinnerError when the instance has none; regret is not
    defined in that case.
    """
    w = condorcet_winner(m)
    if w is None:
        raise NoCondorcetWinnerError("instance has no Condorcet winner")
    delta = m.p[w] - 0.5
    delta_star = float(np.delete(delta, w).max()) if m.k > 1 else 0.0
    return GapVector(winner=w, delta=delta, delta_star=delta_star)


def beat_relation(m: PreferenceMatrix) -> np.ndarray:
    """Boolean strict-majority relation: ``beats[i, j]`` iff p[i, j] > 1/2."""
    beats = m.p > 0.5
    np.fill_diagonal(beats, False)
    return beats


def analyze_assumptions(m: PreferenceMatrix) -> AssumptionReport:
    """Detect a total ordering and measure transitivity along it.

    The candidate order sorts arms by number of majority wins (descending,
    index as tie-break) and counts as a total ordering only when every pair is
    strictly ordered consistently with it.  Along a detected order with arms
    relabelled best-first, gamma is the smallest constant with
    ``gamma * p[0, k] >= max(p[0, j], p[j, k])`` over all ``0 < j < k``, and
    strong transitivity demands ``p[i, k] >= max(p[i, j], p[j, k])`` for every
    ``i < j < k``.
    """
    cw = condorcet_winner(m)
    bw = borda_winner(m)
    p = m.p
    k = m.k
    wins = (beat_relation(m)).sum(axis=1)
    order = sorted(range(k), key=lambda i: (-wins[i], i))
    total = all(
        p[order[a], order[b]] > 0.5 for a in range(k) for b in range(a + 1, k)
    )
    if not total:
        return AssumptionReport(
            condorcet=cw,
            borda=bw,
            total_ordering_holds=False,
            total_order=None,
            gamma=None,
            strong_transitivity_holds=False,
        )
    best = order[0]
    gamma = 1.0
    strong = True
    for a in range(1, k):
        for b in range(a + 1, k):
            j, kk = order[a], order[b]
            need = max(p[best, j], p[j, kk]) / p[best, kk]
            if need > gamma:
                gamma = need
    for a in range(k):
        for b in range(a + 1, k):
            for c in range(b + 1, k):
                i, j, kk = order[a], order[b], order[c]
                if p[i, kk] < max(p[i, j], p[j, kk]):
                    strong = False
    return AssumptionReport(
        condorcet=cw,
        borda=bw,
        total_ordering_holds=True,
        total_order=tuple(order),
        gamma=gamma,
        strong_transitivity_holds=strong,
    )


def _check_beats(beats) -> np.ndarray:
    b = np.asarray(beats, dtype=bool)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise NonSquareError(f"beat relation must be square, got shape {b.shape}")
    if np.diagonal(b).any():
        raise ValueError("beat relation cannot have self-beats on the diagonal")
    if (b & b.T).any():
        raise ValueError("beat relation cannot be mutual for any pair")
    return b


def condorcet_subset_count(beats, subset_size: int) -> int:
    """Exact number of subsets of the given size that have a Condorcet winner.

    With ``n_r`` the number of arms that arm r beats, a subset of size m has r
    as its winner iff its other m - 1 members are drawn from those n_r arms,
    so the count is ``sum_r comb(n_r, m - 1)``.  Python integers keep this
    exact for any K.
    """
    b = _check_beats(beats)
    k = b.shape[0]
    if subset_size < 1:
        raise ValueError(f"subset_size must be >= 1, got {subset_size}")
    if subset_size > k:
        raise SubsetTooLargeError(f"subset_size {subset_size} exceeds {k} arms")
    n_beaten = b.sum(axis=1)
    return sum(math.comb(int(n), subset_size - 1) for n in n_beaten)


def condorcet_subset_probability(beats, subset_size: int) -> float:
    """Probability a uniform subset of the given size has a Condorcet winner."""
    b = _check_beats(beats)
    count = condorcet_subset_count(b, subset_size)
    return count / math.comb(b.shape[0], subset_size)


def total_ordering_probability_mc(
    beats, subset_size: int, samples: int = 10000, seed: int = 0
) -> float:
    """Monte Carlo probability that a uniform subset is totally ordered.

    A subset counts when sorting its members by within-subset wins yields an
    order consistent with every strict pairwise majority (ties in the relation
    fail the check).  Subsets are drawn by taking the ``subset_size`` smallest
    of K iid uniforms, which is uniform over subsets and vectorizes; work is
    chunked to bound memory.
    """
    b = _check_beats(beats)
    k = b.shape[0]
    m = subset_size
    if m < 1:
        raise ValueError(f"subset_size must be >= 1, got {m}")
    if m > k:
        raise SubsetTooLargeError(f"subset_size {m} exceeds {k} arms")
    if samples < 1:
        raise ValueError("samples must be positive")
    if m == 1:
        return 1.0

    rng = np.random.default_rng(seed)
    bi = b.astype(np.int64)
    iu0, iu1 = np.triu_indices(m, 1)
    hits = 0
    done = 0
    chunk = 4096
    while done < samples:
        n = min(chunk, samples - done)
        keys = rng.random((n, k))
        idx = np.argpartition(keys, m - 1, axis=1)[:, :m]
        sub = bi[idx[:, :, None], idx[:, None, :]]
        wins = sub.sum(axis=2)
        order = np.argsort(-wins, axis=1, kind="stable")
        rows = np.arange(n)[:, None, None]
        sorted_sub = sub[rows, order[:, :, None], order[:, None, :]]
        ok = sorted_sub[:, iu0, iu1].all(axis=1)
        hits += int(ok.sum())
        done += n
    return hits / samples


def generate_planted(k: int, delta_min: float, delta_max: float, seed: int) -> PreferenceMatrix:
    """Instance with arm 0 planted as Condorcet winner.

    ``p[0, j]`` is uniform on [1/2 + delta_min, 1/2 + delta_max] for j >= 1;
    every other upper-triangle entry is uniform on [0, 1].  The gap interval
    must satisfy 0 < delta_min <= delta_max < 1/2 (InvalidGapRangeError).
    """
    if not (0.0 < delta_min <= delta_max < 0.5):
        raise InvalidGapRangeError(
            f"need 0 < delta_min <= delta_max < 0.5, got [{delta_min}, {delta_max}]"
        )
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    raw = np.full((k, k), 0.5)
    if k > 1:
        row0 = rng.uniform(0.5 + delta_min, 0.5 + delta_max, size=k - 1)
        raw[0, 1:] = row0
        raw[1:, 0] = 1.0 - row0
    for i in range(1, k):
        for j in range(i + 1, k):
            u = rng.random()
            raw[i, j] = u
            raw[j, i] = 1.0 - u
    return validate(raw)


def generate_cycle(k: int) -> PreferenceMatrix:
    """Rotational tournament with win probability 0.6 along the cycle.

    Arm i beats arm j with 0.6 when the cyclic distance ``(j - i) mod k`` is
    at most half of k; at exactly half (even k) the lower index wins.  For
    k = 3 this is the classic cycle 0 > 1 > 2 > 0 with no Condorcet winner.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    raw = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            d = (j - i) % k
            if d < k / 2 or (d * 2 == k and i < j):
                raw[i, j] = 0.6
                raw[j, i] = 0.4
            else:
                raw[i, j] = 0.4
                raw[j, i] = 0.6
    return validate(raw)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def save_matrix(m: PreferenceMatrix, path) -> None:
    """Write a matrix as CSV or JSON, chosen by file extension.

    CSV is row-major with a leading ``# k=<K>`` comment; JSON is
    ``{"k": K, "p": [[...]]}``.  Probabilities are written with 17 significant
    digits so loading reproduces the exact same floats.
    """
    path = Path(path)
    if path.suffix == ".json":
        rows = ",\n    ".join(
            "[" + ", ".join(_fmt(x) for x in row) + "]" for row in m.p
        )
        path.write_text('{\n  "k": %d,\n  "p": [\n    %s\n  ]\n}\n' % (m.k, rows))
    else:
        lines = [f"# k={m.k}"]
        lines += [",".join(_fmt(x) for x in row) for row in m.p]
        path.write_text("\n".join(lines) + "\n")


def load_matrix(path) -> PreferenceMatrix:
    """Load and validate a matrix saved by :func:`save_matrix`.

    A ``# k=<K>`` comment, when present, is cross-checked against the parsed
    dimension.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
        m = validate(data["p"])
        if "k" in data and int(data["k"]) != m.k:
            raise ValueError(f"header k={data['k']} but matrix has {m.k} rows")
        return m
    declared = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("k="):
                declared = int(body[2:])
            continue
        rows.append([float(tok) for tok in line.split(",")])
    m = validate(rows)
    if declared is not None and declared != m.k:
        raise ValueError(f"header k={declared} but matrix has {m.k} rows")
    return m


def matrix_sha256(m: PreferenceMatrix) -> str:
    """Hex digest identifying the exact matrix contents."""
    payload = ("%d;" % m.k) + ";".join(_fmt(x) for x in m.p.ravel())
    return hashlib.sha256(payload.encode()).hexdigest()
