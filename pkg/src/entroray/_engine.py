"""Hot loop of the perturbation search.

A search maintains, besides the joint mass vector, every subset marginal
in one concatenated buffer plus the per-subset entropies.  A two-point
perturbation moves mass between joint cells i and j; in each marginal it
touches at most the two cells i and j project to (none when they project
to the same cell, since the pair mass is conserved), so a proposal can be
scored by an O(2**n) incremental entropy update instead of a full
recomputation.  Accepted proposals commit the same deltas; rejected ones
touch nothing.

The loop is compiled with numba when available and runs as plain Python
otherwise (same code, same semantics, same random-stream consumption).
Randomness arrives as a pre-generated buffer of uniform triples
(i-draw, j-draw, lambda-draw); one extra row is consumed by every
hyperplane redraw.  The buffer is refilled in fixed-size blocks so a
given seed always replays the identical proposal sequence.

Internal module: the public API lives in :mod:`entroray.search`.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


RAND_BLOCK = 1 << 16

# termination codes
RUNNING = 0
DELTA_REACHED = 1
STALLED = 2
EXHAUSTED = 3

# objective codes
OBJ_DNORM = 0
OBJ_INGLETON_MIN = 1
OBJ_VIOLATION_MAX = 2

_I12, _I13, _I23, _I14, _I24 = 2, 4, 5, 8, 9
_S1, _S2, _T123, _T124, _I34 = 0, 1, 6, 10, 11


def build_layout(sizes):
    """Stride table, marginal-buffer offsets and radix for an alphabet."""
    sizes = tuple(int(s) for s in sizes)
    n = len(sizes)
    nmask = (1 << n) - 1
    strides = np.zeros((nmask, n), dtype=np.int64)
    offs = np.zeros(nmask + 1, dtype=np.int64)
    for mask in range(1, nmask + 1):
        width = 1
        for v in range(n):
            if (mask >> v) & 1:
                strides[mask - 1, v] = width
                width *= sizes[v]
        offs[mask] = offs[mask - 1] + width
    return np.array(sizes, dtype=np.int64), strides, offs


def init_marginals(mass, radix, strides, offs):
    """Dense marginals (concatenated) and subset entropies of a mass vector."""
    n = radix.size
    nmask = (1 << n) - 1
    idx = np.arange(mass.size, dtype=np.int64)
    digits = np.empty((n, mass.size), dtype=np.int64)
    rest = idx
    for v in range(n):
        digits[v] = rest % radix[v]
        rest = rest // radix[v]
    marg = np.zeros(int(offs[-1]))
    for mask in range(1, nmask + 1):
        cell = np.zeros(mass.size, dtype=np.int64)
        for v in range(n):
            if strides[mask - 1, v]:
                cell += digits[v] * strides[mask - 1, v]
        seg = np.bincount(cell, weights=mass, minlength=int(offs[mask] - offs[mask - 1]))
        marg[offs[mask - 1]:offs[mask]] = seg
    hvec = np.empty(nmask)
    for mask in range(1, nmask + 1):
        seg = marg[offs[mask - 1]:offs[mask]]
        pos = seg[seg > 1e-300]
        hvec[mask - 1] = float(-(pos * np.log2(pos)).sum()) if pos.size else 0.0
    return marg, hvec


@njit(cache=True, nogil=True)
def _plogp(x):
    # -x log2 x with the 0 log 0 = 0 convention and clamped fp noise
    if x > 1e-300:
        return -x * np.log(x) * 1.4426950408889634
    return 0.0


@njit(cache=True, nogil=True)
def _dnorm_arr(h, t, t2):
    dot = 0.0
    for k in range(h.size):
        dot += h[k] * t[k]
    if dot <= 0.0:
        return -1.0
    a = dot / t2
    num = 0.0
    den = 0.0
    for k in range(h.size):
        p = a * t[k]
        r = h[k] - p
        num += r * r
        den += p * p
    return np.sqrt(num / den)


@njit(cache=True, nogil=True)
def _ingleton34(h):
    return (h[_I12] + h[_I13] + h[_I23] + h[_I14] + h[_I24]
            - h[_S1] - h[_S2] - h[_T123] - h[_T124] - h[_I34])


@njit(cache=True, nogil=True)
def _objective_value(h, objective, target, t2):
    if objective == OBJ_DNORM:
        return _dnorm_arr(h, target, t2)
    if objective == OBJ_INGLETON_MIN:
        return _ingleton34(h) / h[h.size - 1]
    nrm = 0.0
    for k in range(h.size):
        nrm += h[k] * h[k]
    return -_ingleton34(h) / np.sqrt(nrm)


@njit(cache=True, nogil=True)
def _hp_score(hp, h):
    s = 0.0
    for k in range(h.size):
        s += hp[k] * h[k]
    return s / h[h.size - 1]


@njit(cache=True, nogil=True)
def run_chunk(mass, marg, hvec, radix, strides, offs,
              objective, target, t2, delta, obj_delta, eps,
              max_accepted, max_rejected,
              guided, planes, eta,
              rand, state_f, state_i,
              ev_move, ev_props, ev_obj, ev_ing, ev_tv, ev_hp,
              h_cand, digs_i, digs_j, touch_a, touch_b):
    """Consume one random block; returns (status, rows used, events recorded).

    state_f = [current objective, |score| of active hyperplane]
    state_i = [accepted, consecutive rejects, proposals,
               active hyperplane, redraw pending]
    """
    n = radix.size
    nmask = hvec.size
    cells = mass.size
    has_ing = 1 if n == 4 else 0
    cur = state_f[0]
    s_cur = state_f[1]
    accepted = state_i[0]
    rejects = state_i[1]
    proposals = state_i[2]
    active = state_i[3]
    n_ev = 0
    used = 0
    rows = rand.shape[0]
    if guided == 1 and state_i[4] == 1 and used < rows:
        # redraw deferred from the previous block boundary
        active = int(rand[used, 0] * planes.shape[0])
        if active >= planes.shape[0]:
            active = planes.shape[0] - 1
        used += 1
        s_cur = abs(_hp_score(planes[active], hvec))
        state_i[4] = 0
    while used < rows:
        u0 = rand[used, 0]
        u1 = rand[used, 1]
        u2 = rand[used, 2]
        used += 1
        i = int(u0 * cells)
        if i >= cells:
            i = cells - 1
        j = int(u1 * (cells - 1))
        if j >= cells - 1:
            j = cells - 2
        if j >= i:
            j += 1
        lam = u2 * eps
        pi = mass[i]
        pj = mass[j]
        pair = pi + pj
        pi_new = lam * pair
        di = pi_new - pi
        proposals += 1

        rest = i
        for v in range(n):
            digs_i[v] = rest % radix[v]
            rest //= radix[v]
        rest = j
        for v in range(n):
            digs_j[v] = rest % radix[v]
            rest //= radix[v]
        for m in range(nmask):
            ca = 0
            cb = 0
            for v in range(n):
                st = strides[m, v]
                ca += digs_i[v] * st
                cb += digs_j[v] * st
            if ca == cb:
                touch_a[m] = -1
                h_cand[m] = hvec[m]
            else:
                oa = offs[m] + ca
                ob = offs[m] + cb
                ma = marg[oa]
                mb = marg[ob]
                ma2 = ma + di
                mb2 = mb - di
                if ma2 < 0.0:
                    ma2 = 0.0
                if mb2 < 0.0:
                    mb2 = 0.0
                touch_a[m] = oa
                touch_b[m] = ob
                h_cand[m] = hvec[m] - _plogp(ma) - _plogp(mb) + _plogp(ma2) + _plogp(mb2)

        cand = _objective_value(h_cand, objective, target, t2)
        if objective == OBJ_DNORM:
            improves = 0.0 <= cand and cand < cur
        elif objective == OBJ_INGLETON_MIN:
            improves = cand < cur
        else:
            improves = cand > cur
        if improves and guided == 1:
            if s_cur >= eta:
                s_new = abs(_hp_score(planes[active], h_cand))
                improves = s_new < s_cur

        if improves:
            mass[i] = pi_new
            mass[j] = pair - pi_new
            for m in range(nmask):
                oa = touch_a[m]
                if oa >= 0:
                    ob = touch_b[m]
                    ma2 = marg[oa] + di
                    mb2 = marg[ob] - di
                    marg[oa] = ma2 if ma2 > 0.0 else 0.0
                    marg[ob] = mb2 if mb2 > 0.0 else 0.0
                hvec[m] = h_cand[m]
            prev = cur
            cur = cand
            accepted += 1
            rejects = 0
            ev_move[n_ev] = accepted
            ev_props[n_ev] = proposals
            ev_obj[n_ev] = cand
            ev_ing[n_ev] = _ingleton34(hvec) / hvec[nmask - 1] if has_ing == 1 else np.nan
            ev_tv[n_ev] = 2.0 * abs(di)
            ev_hp[n_ev] = active if guided == 1 else -1
            n_ev += 1
            if guided == 1:
                s_cur = abs(_hp_score(planes[active], hvec))
                if s_cur < eta:
                    if used < rows:
                        active = int(rand[used, 0] * planes.shape[0])
                        if active >= planes.shape[0]:
                            active = planes.shape[0] - 1
                        used += 1
                        s_cur = abs(_hp_score(planes[active], hvec))
                    else:
                        state_i[4] = 1  # block exhausted; redraw next block
            if objective == OBJ_DNORM and cand <= delta:
                state_f[0] = cur
                state_f[1] = s_cur
                state_i[0] = accepted
                state_i[1] = rejects
                state_i[2] = proposals
                state_i[3] = active
                return DELTA_REACHED, used, n_ev
            if obj_delta >= 0.0 and abs(cand - prev) <= obj_delta:
                state_f[0] = cur
                state_f[1] = s_cur
                state_i[0] = accepted
                state_i[1] = rejects
                state_i[2] = proposals
                state_i[3] = active
                return DELTA_REACHED, used, n_ev
            if accepted >= max_accepted:
                state_f[0] = cur
                state_f[1] = s_cur
                state_i[0] = accepted
                state_i[1] = rejects
                state_i[2] = proposals
                state_i[3] = active
                return EXHAUSTED, used, n_ev
        else:
            rejects += 1
            if rejects >= max_rejected:
                state_f[0] = cur
                state_f[1] = s_cur
                state_i[0] = accepted
                state_i[1] = rejects
                state_i[2] = proposals
                state_i[3] = active
                return STALLED, used, n_ev
    state_f[0] = cur
    state_f[1] = s_cur
    state_i[0] = accepted
    state_i[1] = rejects
    state_i[2] = proposals
    state_i[3] = active
    return RUNNING, used, n_ev
