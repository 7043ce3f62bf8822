"""Compare the numba and numpy learning kernels on stop light self-play.

    python benchmarks/bench_backends.py [--T 20000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from commitment_lab import build_congestion, build_stop_light, run_self_play
from commitment_lab.kernels import _jit, _np

ALGORITHMS = ("regret_matching", "hedge", "swap_regret", "pgd")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    games = {"stop_light": build_stop_light(), "congestion_3x3": build_congestion(3, [(1, 0), (2, 1), (0, 3)])}
    # compile once so the numba column measures steady-state time
    for g in games.values():
        for alg in ALGORITHMS:
            run_self_play(g, alg, 2, backend="numba")

    print(f"T={args.T}, best of {args.repeat}")
    print(f"{'game':<16}{'algorithm':<17}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  same play")
    for name, g in games.items():
        for alg in ALGORITHMS:
            tj = best_of(lambda: run_self_play(g, alg, args.T, seed=1, backend="numba"), args.repeat)
            tn = best_of(lambda: run_self_play(g, alg, args.T, seed=1, backend="numpy"), args.repeat)
            same = np.array_equal(
                run_self_play(g, alg, args.T, seed=1, backend="numba").profiles,
                run_self_play(g, alg, args.T, seed=1, backend="numpy").profiles,
            )
            print(f"{name:<16}{alg:<17}{tj:>10.4f}{tn:>10.4f}{tn / tj:>8.1f}x  {same}")

    v = np.random.default_rng(0).normal(size=16)
    n = 20_000
    tj = best_of(lambda: [_jit.project_to_simplex(v) for _ in range(n)], args.repeat)
    tn = best_of(lambda: [_np.project_to_simplex(v) for _ in range(n)], args.repeat)
    print(f"{'simplex proj':<16}{'16-dim x' + str(n):<17}{tj:>10.4f}{tn:>10.4f}{tn / tj:>8.1f}x")


if __name__ == "__main__":
    main()
