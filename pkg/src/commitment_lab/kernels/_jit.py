"""Numba-compiled learning kernels.

The functions here mirror :mod:`commitment_lab.kernels._np` one for one and
must produce the same trajectories given the same uniforms. Games are passed
in flattened form: ``payoffs[i, k]`` is player ``i``'s payoff at the profile
with C-order flat index ``k``, and ``strides[i]`` is the flat-index step of
player ``i``'s action.
"""

import numpy as np
from numba import njit

RM = 0
HEDGE = 1
SWAP = 2
PGD = 3

SINGULAR_TOL = 1e-12


@njit(cache=True, nogil=True)
def project_to_simplex(v):
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += u[j]
        t = (css - 1.0) / (j + 1)
        if u[j] - t > 0.0:
            theta = t
    out = np.empty(n)
    for j in range(n):
        out[j] = max(v[j] - theta, 0.0)
    return out


@njit(cache=True, nogil=True)
def regret_matching_strategy(regrets):
    n = regrets.shape[0]
    out = np.empty(n)
    total = 0.0
    for a in range(n):
        out[a] = max(regrets[a], 0.0)
        total += out[a]
    if total > 0.0:
        for a in range(n):
            out[a] /= total
    else:
        for a in range(n):
            out[a] = 1.0 / n
    return out


@njit(cache=True, nogil=True)
def softmax(logw):
    n = logw.shape[0]
    m = logw[0]
    for a in range(1, n):
        if logw[a] > m:
            m = logw[a]
    out = np.empty(n)
    total = 0.0
    for a in range(n):
        out[a] = np.exp(logw[a] - m)
        total += out[a]
    for a in range(n):
        out[a] /= total
    return out


@njit(cache=True, nogil=True)
def stationary_distribution(q):
    """Solve p Q = p, sum(p) = 1. Returns (p, singular)."""
    n = q.shape[0]
    a = np.empty((n, n))
    b = np.zeros(n)
    for r in range(n):
        for c in range(n):
            a[r, c] = q[c, r]
        a[r, r] -= 1.0
    for c in range(n):
        a[n - 1, c] = 1.0
    b[n - 1] = 1.0
    # Gaussian elimination with partial pivoting
    for col in range(n):
        piv = col
        best = abs(a[col, col])
        for r in range(col + 1, n):
            if abs(a[r, col]) > best:
                best = abs(a[r, col])
                piv = r
        if best < SINGULAR_TOL:
            out = np.empty(n)
            for k in range(n):
                out[k] = 1.0 / n
            return out, True
        if piv != col:
            for c in range(n):
                tmp = a[col, c]
                a[col, c] = a[piv, c]
                a[piv, c] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        for r in range(col + 1, n):
            f = a[r, col] / a[col, col]
            if f != 0.0:
                for c in range(col, n):
                    a[r, c] -= f * a[col, c]
                b[r] -= f * b[col]
    p = np.empty(n)
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s -= a[r, c] * p[c]
        p[r] = s / a[r, r]
    total = 0.0
    for k in range(n):
        if p[k] < 0.0:
            p[k] = 0.0
        total += p[k]
    for k in range(n):
        p[k] /= total
    return p, False


@njit(cache=True, nogil=True)
def self_play(payoffs, n_actions, strides, algos, params, init, uniforms):
    """Run simultaneous full-information self-play.

    ``init[i, :n_actions[i]]`` is player i's round-1 mixed strategy (its
    sub-learner matrix rows start uniform for swap learners).  Returns the
    realized profiles ``(T, n)``, the mixed strategies played ``(T, n, A)``
    and the per-round singular-solve flags ``(T, n)``.
    """
    T = uniforms.shape[0]
    n = n_actions.shape[0]
    amax = 0
    for i in range(n):
        if n_actions[i] > amax:
            amax = n_actions[i]

    strat = np.zeros((n, amax))
    regrets = np.zeros((n, amax))
    logw = np.zeros((n, amax))
    sub_regrets = np.zeros((n, amax, amax))
    sub_strat = np.zeros((n, amax, amax))
    for i in range(n):
        m = n_actions[i]
        for a in range(m):
            strat[i, a] = init[i, a]
            for b in range(m):
                sub_strat[i, a, b] = 1.0 / m

    profiles = np.empty((T, n), dtype=np.int64)
    history = np.zeros((T, n, amax))
    flags = np.zeros((T, n), dtype=np.bool_)
    v = np.empty(amax)

    for t in range(T):
        idx = 0
        for i in range(n):
            m = n_actions[i]
            for a in range(m):
                history[t, i, a] = strat[i, a]
            u = uniforms[t, i]
            c = 0.0
            pick = -1
            for a in range(m):
                c += strat[i, a]
                if u < c:
                    pick = a
                    break
            if pick < 0:
                # rounding left u above the cumulative sum: last supported action
                for a in range(m - 1, -1, -1):
                    if strat[i, a] > 0.0:
                        pick = a
                        break
            profiles[t, i] = pick
            idx += pick * strides[i]

        for i in range(n):
            m = n_actions[i]
            base = idx - profiles[t, i] * strides[i]
            for a in range(m):
                v[a] = payoffs[i, base + a * strides[i]]
            algo = algos[i]
            if algo == RM:
                ev = 0.0
                for a in range(m):
                    ev += strat[i, a] * v[a]
                for a in range(m):
                    regrets[i, a] += v[a] - ev
                s = regret_matching_strategy(regrets[i, :m])
                for a in range(m):
                    strat[i, a] = s[a]
            elif algo == HEDGE:
                for a in range(m):
                    logw[i, a] += params[i] * v[a]
                s = softmax(logw[i, :m])
                for a in range(m):
                    strat[i, a] = s[a]
            elif algo == SWAP:
                for j in range(m):
                    pj = strat[i, j]
                    ev = 0.0
                    for a in range(m):
                        ev += sub_strat[i, j, a] * v[a]
                    for a in range(m):
                        sub_regrets[i, j, a] += pj * (v[a] - ev)
                    s = regret_matching_strategy(sub_regrets[i, j, :m])
                    for a in range(m):
                        sub_strat[i, j, a] = s[a]
                p, singular = stationary_distribution(sub_strat[i, :m, :m].copy())
                flags[t, i] = singular
                for a in range(m):
                    strat[i, a] = p[a]
            else:
                eta = params[i] / np.sqrt(t + 1.0)
                x = np.empty(m)
                for a in range(m):
                    x[a] = strat[i, a] + eta * v[a]
                s = project_to_simplex(x)
                for a in range(m):
                    strat[i, a] = s[a]
    return profiles, history, flags
