"""Pure-numpy learning kernels (fallback when numba is unavailable or disabled).

Same contracts as :mod:`commitment_lab.kernels._jit`; the round loop stays in
Python but every per-player update is a vector operation.
"""

import numpy as np

RM = 0
HEDGE = 1
SWAP = 2
PGD = 3

SINGULAR_TOL = 1e-12


def project_to_simplex(v):
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def regret_matching_strategy(regrets):
    pos = np.maximum(regrets, 0.0)
    total = pos.sum()
    if total > 0.0:
        return pos / total
    return np.full(regrets.shape[0], 1.0 / regrets.shape[0])


def _regret_matching_rows(regrets):
    pos = np.maximum(regrets, 0.0)
    total = pos.sum(axis=1, keepdims=True)
    uniform = total[:, 0] <= 0.0
    out = np.divide(pos, total, out=np.zeros_like(pos), where=~uniform[:, None])
    out[uniform] = 1.0 / regrets.shape[1]
    return out


def softmax(logw):
    w = np.exp(logw - logw.max())
    return w / w.sum()


def stationary_distribution(q):
    """Solve p Q = p, sum(p) = 1. Returns (p, singular).

    Action sets are small, so elimination runs on Python floats; per-call
    numpy overhead would dominate. Pivoting matches the compiled kernel.
    """
    n = q.shape[0]
    a = q.T.tolist()
    for r in range(n):
        a[r][r] -= 1.0
    a[n - 1] = [1.0] * n
    b = [0.0] * n
    b[n - 1] = 1.0
    for col in range(n):
        piv, best = col, abs(a[col][col])
        for r in range(col + 1, n):
            if abs(a[r][col]) > best:
                piv, best = r, abs(a[r][col])
        if best < SINGULAR_TOL:
            return np.full(n, 1.0 / n), True
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        rowc = a[col]
        for r in range(col + 1, n):
            f = a[r][col] / rowc[col]
            if f != 0.0:
                row = a[r]
                for c in range(col, n):
                    row[c] -= f * rowc[c]
                b[r] -= f * b[col]
    p = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = b[r]
        for c in range(r + 1, n):
            s -= a[r][c] * p[c]
        p[r] = s / a[r][r]
    out = np.maximum(np.array(p), 0.0)
    return out / out.sum(), False


def self_play(payoffs, n_actions, strides, algos, params, init, uniforms):
    T = uniforms.shape[0]
    n = n_actions.shape[0]
    amax = int(n_actions.max())

    strat = [np.array(init[i, : n_actions[i]], dtype=float) for i in range(n)]
    regrets = [np.zeros(m) for m in n_actions]
    logw = [np.zeros(m) for m in n_actions]
    sub_regrets = [np.zeros((m, m)) for m in n_actions]
    sub_strat = [np.full((m, m), 1.0 / m) for m in n_actions]
    offsets = [np.arange(m) * strides[i] for i, m in enumerate(n_actions)]

    profiles = np.empty((T, n), dtype=np.int64)
    history = np.zeros((T, n, amax))
    flags = np.zeros((T, n), dtype=bool)

    for t in range(T):
        for i in range(n):
            s = strat[i]
            history[t, i, : s.shape[0]] = s
            pick = int(np.searchsorted(np.cumsum(s), uniforms[t, i], side="right"))
            if pick >= s.shape[0]:
                pick = int(np.nonzero(s > 0.0)[0][-1])
            profiles[t, i] = pick
        idx = int(profiles[t] @ strides)

        for i in range(n):
            base = idx - profiles[t, i] * strides[i]
            v = payoffs[i, base + offsets[i]]
            algo = algos[i]
            if algo == RM:
                regrets[i] += v - strat[i] @ v
                strat[i] = regret_matching_strategy(regrets[i])
            elif algo == HEDGE:
                logw[i] += params[i] * v
                strat[i] = softmax(logw[i])
            elif algo == SWAP:
                ev = sub_strat[i] @ v
                sub_regrets[i] += strat[i][:, None] * (v[None, :] - ev[:, None])
                sub_strat[i] = _regret_matching_rows(sub_regrets[i])
                strat[i], flags[t, i] = stationary_distribution(sub_strat[i])
            else:
                eta = params[i] / np.sqrt(t + 1.0)
                strat[i] = project_to_simplex(strat[i] + eta * v)
    return profiles, history, flags
