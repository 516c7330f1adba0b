"""Hot loops for the simulation drivers.

The functions here are written in the subset of Python that numba's nopython
mode compiles; when numba is available they are jitted (nogil, cached), and
otherwise the same source runs under the plain interpreter.  Either way the
arithmetic is identical operation for operation with the step-by-step
component API in :mod:`duelband.rucb`: divisions, square roots and additions
are individually IEEE-rounded in both paths, and the per-step bonus scale
sqrt(alpha ln t) is precomputed once and shared, so a kernel run and a
component-loop run from the same seed produce bit-identical traces.  Tests
assert that equivalence; rely on it only through them.

Uniform-draw layout (one generator, pre-drawn as a flat block):

* relative-UCB loop: 3 draws per step - champion choice, challenger
  tie-break, duel outcome;
* random-pairing loop: 2 draws per step - pair choice, duel outcome.

Coverage auditing exploits the fact that a pair's confidence interval only
widens while its counts stay fixed: one full sweep when the audit window
opens at t_start, then only the freshly updated pair afterwards.  The
``audit_out`` vector carries [violated, first_t, first_i, first_j,
non-winner self-duels after t_start].
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


__all__ = ["HAS_NUMBA", "pair_covered", "rucb_loop", "random_pairing_loop"]


@njit(cache=True, nogil=True)
def pair_covered(p, w, n, sa, i, j):
    """Whether p[i, j] lies in [l_ij, u_ij] for bonus scale sa at the pair's counts."""
    nij = n[i, j]
    if nij == 0.0:
        return True
    b = sa / math.sqrt(nij)
    hi = w[i, j] / nij + b
    lo = 1.0 - (w[j, i] / nij + b)
    return lo <= p[i, j] <= hi


@njit(cache=True, nogil=True)
def _audit_full_sweep(p, w, n, sa, t, audit_out):
    k = p.shape[0]
    for i in range(k):
        for j in range(k):
            if i != j and not pair_covered(p, w, n, sa, i, j):
                if audit_out[0] == 0:
                    audit_out[0] = 1
                    audit_out[1] = t
                    audit_out[2] = i
                    audit_out[3] = j
                return


@njit(cache=True, nogil=True)
def _audit_pair(p, w, n, sa, t, i, j, audit_out):
    if not (pair_covered(p, w, n, sa, i, j) and pair_covered(p, w, n, sa, j, i)):
        if audit_out[0] == 0:
            audit_out[0] = 1
            audit_out[1] = t
            audit_out[2] = i
            audit_out[3] = j


@njit(cache=True, nogil=True)
def _best_arm_counts(w, n, selfc, k, cp_n, ci):
    """Snapshot counts into cp_n[ci] and return the best-arm index."""
    best = 0
    best_count = -1
    for a in range(k):
        cp_n[ci, a, a] = selfc[a]
        count = 0
        for j in range(k):
            if j == a:
                continue
            cp_n[ci, a, j] = int(n[a, j])
            if n[a, j] == 0.0:
                count += 1
            elif w[a, j] / n[a, j] > 0.5:
                count += 1
        if count > best_count:
            best_count = count
            best = a
    return best


@njit(cache=True, nogil=True)
def rucb_loop(
    p,
    delta,
    su,
    uniforms,
    horizon,
    cp_ts,
    st_i,
    st_j,
    st_win,
    st_reg,
    st_cum,
    record_steps,
    cp_cum,
    cp_best,
    cp_n,
    cp_i,
    cp_j,
    cp_win,
    cp_reg,
    audit_on,
    t_start,
    audit_su,
    winner_idx,
    audit_out,
    out_w,
    out_self,
):
    k = p.shape[0]
    w = np.zeros((k, k))
    n = np.zeros((k, k))
    mu = np.ones((k, k))
    sqrtn = np.zeros((k, k))
    u_mat = np.zeros((k, k))
    pool = np.zeros(k, dtype=np.int64)
    maxers = np.zeros(k, dtype=np.int64)
    selfc = np.zeros(k, dtype=np.int64)
    cum = 0.0
    ci = 0
    n_cp = cp_ts.shape[0]

    for t in range(1, horizon + 1):
        s = su[t]
        for i in range(k):
            for j in range(k):
                if i == j:
                    u_mat[i, j] = 0.5
                elif n[i, j] == 0.0:
                    u_mat[i, j] = 2.0
                else:
                    u_mat[i, j] = mu[i, j] + s / sqrtn[i, j]

        npool = 0
        for a in range(k):
            ok = True
            for j in range(k):
                if u_mat[a, j] < 0.5:
                    ok = False
                    break
            if ok:
                pool[npool] = a
                npool += 1
        u1 = uniforms[3 * (t - 1)]
        if npool > 0:
            idx = int(u1 * npool)
            if idx >= npool:
                idx = npool - 1
            c = pool[idx]
        else:
            idx = int(u1 * k)
            if idx >= k:
                idx = k - 1
            c = idx

        mx = u_mat[0, c]
        for j in range(1, k):
            if u_mat[j, c] > mx:
                mx = u_mat[j, c]
        nm = 0
        for j in range(k):
            if j != c and u_mat[j, c] == mx:
                maxers[nm] = j
                nm += 1
        if nm == 0:
            maxers[0] = c
            nm = 1
        u2 = uniforms[3 * (t - 1) + 1]
        idx = int(u2 * nm)
        if idx >= nm:
            idx = nm - 1
        d = maxers[idx]

        u3 = uniforms[3 * (t - 1) + 2]
        win = c if u3 < p[c, d] else d
        lose = d if win == c else c
        reg = 0.5 * (delta[c] + delta[d])
        cum += reg

        if c != d:
            w[win, lose] += 1.0
            n[c, d] += 1.0
            n[d, c] = n[c, d]
            sq = math.sqrt(n[c, d])
            sqrtn[c, d] = sq
            sqrtn[d, c] = sq
            mu[c, d] = w[c, d] / n[c, d]
            mu[d, c] = w[d, c] / n[d, c]
        else:
            selfc[c] += 1

        if audit_on and t >= t_start:
            sa = audit_su[t]
            if t == t_start:
                _audit_full_sweep(p, w, n, sa, t, audit_out)
            elif c != d:
                _audit_pair(p, w, n, sa, t, c, d, audit_out)
            if c == d and t > t_start and c != winner_idx:
                audit_out[4] += 1

        if record_steps:
            st_i[t - 1] = c
            st_j[t - 1] = d
            st_win[t - 1] = win
            st_reg[t - 1] = reg
            st_cum[t - 1] = cum

        if ci < n_cp and t == cp_ts[ci]:
            cp_cum[ci] = cum
            cp_best[ci] = _best_arm_counts(w, n, selfc, k, cp_n, ci)
            cp_i[ci] = c
            cp_j[ci] = d
            cp_win[ci] = win
            cp_reg[ci] = reg
            ci += 1

    for i in range(k):
        out_self[i] = selfc[i]
        for j in range(k):
            out_w[i, j] = int(w[i, j])
    return cum


@njit(cache=True, nogil=True)
def random_pairing_loop(
    p,
    delta,
    uniforms,
    horizon,
    pair_a,
    pair_b,
    cp_ts,
    st_i,
    st_j,
    st_win,
    st_reg,
    st_cum,
    record_steps,
    cp_cum,
    cp_best,
    cp_n,
    cp_i,
    cp_j,
    cp_win,
    cp_reg,
    audit_on,
    t_start,
    audit_su,
    winner_idx,
    audit_out,
    out_w,
    out_self,
):
    k = p.shape[0]
    w = np.zeros((k, k))
    n = np.zeros((k, k))
    selfc = np.zeros(k, dtype=np.int64)
    n_pairs = pair_a.shape[0]
    cum = 0.0
    ci = 0
    n_cp = cp_ts.shape[0]

    for t in range(1, horizon + 1):
        u1 = uniforms[2 * (t - 1)]
        idx = int(u1 * n_pairs)
        if idx >= n_pairs:
            idx = n_pairs - 1
        i = pair_a[idx]
        j = pair_b[idx]

        u2 = uniforms[2 * (t - 1) + 1]
        win = i if u2 < p[i, j] else j
        lose = j if win == i else i
        reg = 0.5 * (delta[i] + delta[j])
        cum += reg

        if i != j:
            w[win, lose] += 1.0
            n[i, j] += 1.0
            n[j, i] = n[i, j]
        else:
            selfc[i] += 1

        if audit_on and t >= t_start:
            sa = audit_su[t]
            if t == t_start:
                _audit_full_sweep(p, w, n, sa, t, audit_out)
            elif i != j:
                _audit_pair(p, w, n, sa, t, i, j, audit_out)
            if i == j and t > t_start and i != winner_idx:
                audit_out[4] += 1

        if record_steps:
            st_i[t - 1] = i
            st_j[t - 1] = j
            st_win[t - 1] = win
            st_reg[t - 1] = reg
            st_cum[t - 1] = cum

        if ci < n_cp and t == cp_ts[ci]:
            cp_cum[ci] = cum
            cp_best[ci] = _best_arm_counts(w, n, selfc, k, cp_n, ci)
            cp_i[ci] = i
            cp_j[ci] = j
            cp_win[ci] = win
            cp_reg[ci] = reg
            ci += 1

    for i in range(k):
        out_self[i] = selfc[i]
        for j in range(k):
            out_w[i, j] = int(w[i, j])
    return cum
