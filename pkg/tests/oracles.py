"""Independent brute-force oracles.

Nothing here imports the code under test except for type conversion; the
stop light table and device are restated literally.
"""

import itertools
from fractions import Fraction as F

import numpy as np

FAST, CAUTION, STOP = 0, 1, 2

STOP_LIGHT_TABLE = {
    (0, 0): (F(0), F(0)), (0, 1): (F(3), F(1)), (0, 2): (F(7), F(2)),
    (1, 0): (F(1), F(3)), (1, 1): (F(21, 10), F(21, 10)), (1, 2): (F(6), F(2)),
    (2, 0): (F(2), F(7)), (2, 1): (F(2), F(6)), (2, 2): (F(4), F(4)),
}

# signal -> (probability, (row action, column action))
STOP_LIGHT_SIGNALS = {
    "FS": (F(1, 3), (STOP, FAST)),
    "SF": (F(1, 3), (FAST, STOP)),
    "SC": (F(1, 6), (CAUTION, STOP)),
    "CS": (F(1, 6), (STOP, CAUTION)),
}


def table_of(game):
    return {p: tuple(game.payoffs[p]) for p in itertools.product(*(range(m) for m in game.n_actions))}


def stop_light_outcomes():
    out = {}
    for prob, prof in STOP_LIGHT_SIGNALS.values():
        out[prof] = out.get(prof, 0) + prob
    return out


def brute_unconditional_gains(table, n_actions, weights):
    """{(player, action): gain} by looping over the full profile space."""
    gains = {}
    for i, m in enumerate(n_actions):
        for a in range(m):
            g = F(0)
            for prof in itertools.product(*(range(k) for k in n_actions)):
                w = weights.get(prof, 0)
                if not w:
                    continue
                dev = prof[:i] + (a,) + prof[i + 1:]
                g += w * (table[dev][i] - table[prof][i])
            gains[i, a] = g
    return gains


def brute_cce_epsilon(table, n_actions, weights):
    return max([F(0)] + list(brute_unconditional_gains(table, n_actions, weights).values()))


def brute_conditional_gains(table, n_actions, signals):
    """{(player, rec, alt): (conditional gain, P(rec))} from a signal list [(prob, profile)]."""
    out = {}
    for i, m in enumerate(n_actions):
        for r in range(m):
            hits = [(p, prof) for p, prof in signals if prof[i] == r and p > 0]
            occ = sum(p for p, _ in hits)
            if occ == 0:
                continue
            for a in range(m):
                tot = sum(p * (table[prof[:i] + (a,) + prof[i + 1:]][i] - table[prof][i]) for p, prof in hits)
                out[i, r, a] = (tot / occ, occ)
    return out


def brute_ce_epsilon(table, n_actions, signals, joint=False):
    vals = [g * occ if joint else g for g, occ in brute_conditional_gains(table, n_actions, signals).values()]
    return max([F(0)] + vals)


def grid_projection(v, resolution=400):
    """Closest point of a 3-simplex grid to v (squared Euclidean)."""
    v = np.asarray(v, dtype=float)
    best, arg = np.inf, None
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            x = np.array([i, j, resolution - i - j]) / resolution
            d = float(((x - v) ** 2).sum())
            if d < best:
                best, arg = d, x
    return arg


def naive_regrets(table, profiles, player, m):
    """(external, swap) by explicit loops; swap enumerates every map phi: A -> A."""
    profiles = [tuple(int(a) for a in p) for p in profiles]
    ext = None
    for a in range(m):
        tot = 0.0
        for p in profiles:
            tot += float(table[p[:player] + (a,) + p[player + 1:]][player]) - float(table[p][player])
        ext = tot if ext is None else max(ext, tot)
    swap = None
    for phi in itertools.product(range(m), repeat=m):
        tot = 0.0
        for p in profiles:
            b = phi[p[player]]
            tot += float(table[p[:player] + (b,) + p[player + 1:]][player]) - float(table[p][player])
        swap = tot if swap is None else max(swap, tot)
    return ext, swap
