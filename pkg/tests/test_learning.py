import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commitment_lab import (
    LearnerSpec,
    LearnerState,
    build_congestion,
    build_stop_light,
    cce_epsilon,
    external_regret,
    hedge_step,
    pgd_step,
    project_to_simplex,
    regret_matching_step,
    run_self_play,
    swap_regret,
    swap_regret_step,
)
from commitment_lab.learning import LearnerError, LearnerTrace, certify_ce, certify_cce, stationary_distribution
from oracles import STOP_LIGHT_TABLE, grid_projection, naive_regrets


def state(alg, m=3, **kw):
    s = LearnerState.initial(alg, m)
    return s.__class__(**{**s.__dict__, **{k: np.asarray(v, float) for k, v in kw.items()}})


# -- single steps ------------------------------------------------------------


def test_rm_uniform_on_equal_payoffs():
    s = regret_matching_step(LearnerState.initial("regret_matching", 3), [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(s.strategy, np.full(3, 1 / 3))


def test_rm_single_positive_regret():
    s = state("regret_matching", regrets=[2.0, 0.0, -1.0])
    s = regret_matching_step(s, [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(s.strategy, [1.0, 0.0, 0.0])


def test_rm_length_mismatch():
    with pytest.raises(LearnerError):
        regret_matching_step(LearnerState.initial("regret_matching", 3), [1.0, 2.0])


def test_hedge_examples():
    s = LearnerState.initial("hedge", 3)
    np.testing.assert_allclose(hedge_step(s, [0.0, 0.0, 0.0], 0.3).strategy, s.strategy, rtol=0, atol=0)
    two = hedge_step(LearnerState.initial("hedge", 2), [1.0, 0.0], math.log(2))
    np.testing.assert_allclose(two.strategy, [2 / 3, 1 / 3], rtol=1e-15)
    with pytest.raises(LearnerError):
        hedge_step(s, [np.inf, 0.0, 0.0], 0.1)
    with pytest.raises(LearnerError):
        hedge_step(s, [0.0, 0.0, 0.0], 0.0)


def test_swap_uniform_subs_give_uniform():
    p, singular = stationary_distribution(np.full((3, 3), 1 / 3))
    np.testing.assert_allclose(p, np.full(3, 1 / 3), atol=1e-15)
    assert not singular
    s = swap_regret_step(LearnerState.initial("swap_regret", 3), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(s.strategy, np.full(3, 1 / 3), atol=1e-15)


def test_swap_permutation_cycle():
    cycle = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], float)  # 0 -> 1 -> 2 -> 0
    p, singular = stationary_distribution(cycle)
    # hand solve: p0 = p2, p1 = p0, p2 = p1 -> uniform
    np.testing.assert_allclose(p, np.full(3, 1 / 3), atol=1e-15)
    assert not singular


def test_swap_singular_falls_back():
    # fixed point plus a 2-cycle: two closed classes, no unique solution
    q = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], float)
    p, singular = stationary_distribution(q)
    assert singular
    np.testing.assert_array_equal(p, np.full(3, 1 / 3))


def test_swap_stationary_two_state():
    q = np.array([[0.5, 0.5], [0.25, 0.75]])
    p, _ = stationary_distribution(q)
    np.testing.assert_allclose(p, [1 / 3, 2 / 3], atol=1e-15)
    np.testing.assert_allclose(p @ q, p, atol=1e-15)


def test_pgd_examples():
    vertex = state("pgd", 2, strategy=[1.0, 0.0])
    np.testing.assert_array_equal(pgd_step(vertex, [1.0, 0.0], 0.5).strategy, [1.0, 0.0])
    mid = state("pgd", 2, strategy=[0.5, 0.5])
    # (0.5, 0.5) + 0.2 * (1, 0) = (0.7, 0.5) is off the simplex; it projects to (0.6, 0.4)
    np.testing.assert_allclose(pgd_step(mid, [1.0, 0.0], 0.2).strategy, [0.6, 0.4], atol=1e-15)
    np.testing.assert_allclose(grid_projection([0.7, 0.5, -10.0])[:2], [0.6, 0.4], atol=1e-12)
    np.testing.assert_allclose(pgd_step(mid, [1.0, -1.0], 0.2).strategy, [0.7, 0.3], atol=1e-15)
    with pytest.raises(LearnerError):
        pgd_step(mid, [np.nan, 0.0], 0.2)
    with pytest.raises(LearnerError):
        pgd_step(mid, [1.0, 0.0], 0.0)


def test_projection_examples():
    np.testing.assert_allclose(project_to_simplex([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5], atol=1e-15)
    np.testing.assert_array_equal(project_to_simplex([2.0, 0.0]), [1.0, 0.0])
    np.testing.assert_allclose(project_to_simplex([0.6, 0.6, 0.0]), [0.5, 0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(grid_projection([0.6, 0.6, 0.0]), [0.5, 0.5, 0.0], atol=1e-12)
    with pytest.raises(LearnerError):
        project_to_simplex([])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3))
def test_projection_matches_grid(v):
    p = project_to_simplex(v)
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12
    g = grid_projection(v, 200)
    # grid spacing 1/200; the true projection is at least as close as the grid point
    assert np.abs(p - g).max() <= 1 / 200 + 1e-12
    assert ((p - v) ** 2).sum() <= ((g - v) ** 2).sum() + 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(["regret_matching", "hedge", "swap_regret", "pgd"]),
    # dyadic grid so the shift is exact in floats; a rounded-away 1e-200 regret
    # would legitimately flip regret matching, which is discontinuous at zero
    st.lists(st.integers(-40, 40).map(lambda k: k / 8), min_size=3, max_size=3),
    st.lists(st.integers(-40, 40).map(lambda k: k / 8), min_size=3, max_size=3),
    st.integers(-80, 80).map(lambda k: k / 8),
)
def test_constant_shift_invariance(alg, v1, v2, c):
    def run(shift):
        s = LearnerState.initial(alg, 3)
        for v in (v1, v2):
            v = np.asarray(v) + shift
            if alg == "regret_matching":
                s = regret_matching_step(s, v)
            elif alg == "hedge":
                s = hedge_step(s, v, 0.3)
            elif alg == "swap_regret":
                s = swap_regret_step(s, v)
            else:
                s = pgd_step(s, v, 0.1)
        return s.strategy

    np.testing.assert_allclose(run(0.0), run(c), atol=1e-9)


# -- self-play -----------------------------------------------------------------


def test_single_round_point_mass(stop_light):
    tr = run_self_play(stop_light, "regret_matching", 1, seed=4)
    dist = tr.empirical_distribution
    assert len(dist) == 1 and list(dist.values()) == [F(1)]


@pytest.mark.parametrize("alg", ["regret_matching", "hedge", "swap_regret", "pgd"])
def test_determinism(stop_light, alg):
    a = run_self_play(stop_light, alg, 500, seed=9)
    b = run_self_play(stop_light, alg, 500, seed=9)
    np.testing.assert_array_equal(a.profiles, b.profiles)
    np.testing.assert_array_equal(a.strategies, b.strategies)


def test_seed_changes_play(stop_light):
    a = run_self_play(stop_light, "hedge", 500, seed=9)
    b = run_self_play(stop_light, "hedge", 500, seed=10)
    assert not np.array_equal(a.profiles, b.profiles)


def test_empirical_weights_are_counts(stop_light):
    tr = run_self_play(stop_light, "hedge", 777, seed=2)
    dist = tr.empirical_distribution
    assert sum(dist.values()) == 1
    for prof, w in dist.items():
        assert w == F(int((tr.profiles == prof).all(axis=1).sum()), 777)


def test_invalid_specs(stop_light):
    with pytest.raises(LearnerError):
        run_self_play(stop_light, "regret_matching", 0)
    with pytest.raises(LearnerError):
        run_self_play(stop_light, ["hedge"], 10)
    with pytest.raises(LearnerError):
        LearnerSpec("sarsa")
    with pytest.raises(LearnerError):
        LearnerSpec("hedge", learning_rate=-1.0)


def _replay(trace, player):
    """Feed the trace's realized feedback through the reference step functions."""
    spec = trace.specs[player]
    m = trace.game.n_actions[player]
    cf, _ = trace.counterfactual_payoffs(player)
    s = LearnerState.initial(spec.algorithm, m)
    param = spec.parameter(trace.game, player, trace.T)
    out = []
    for t in range(trace.T):
        out.append(s.strategy)
        if spec.algorithm == "regret_matching":
            s = regret_matching_step(s, cf[t])
        elif spec.algorithm == "hedge":
            s = hedge_step(s, cf[t], param)
        elif spec.algorithm == "swap_regret":
            s = swap_regret_step(s, cf[t])
        else:
            s = pgd_step(s, cf[t], param / math.sqrt(t + 1))
    return np.array(out)


@pytest.mark.parametrize("alg", ["regret_matching", "hedge", "swap_regret", "pgd"])
def test_kernel_matches_reference_steps(stop_light, alg):
    tr = run_self_play(stop_light, alg, 400, seed=21)
    for i in range(2):
        np.testing.assert_allclose(tr.strategies[:, i, :3], _replay(tr, i), atol=1e-10)


def test_mixed_learners_three_players():
    g = build_congestion(3, [(1, 0), (2, 1), (0, 3)])
    specs = [LearnerSpec("regret_matching"), LearnerSpec("hedge"), LearnerSpec("pgd")]
    tr = run_self_play(g, specs, 300, seed=1)
    for i in range(3):
        np.testing.assert_allclose(tr.strategies[:, i, :3], _replay(tr, i), atol=1e-10)
    assert certify_cce(tr) <= max(external_regret(tr, i) for i in range(3)) / tr.T + 1e-9


def test_regrets_match_naive_oracle(stop_light):
    tr = run_self_play(stop_light, "hedge", 60, seed=8, )
    for i in range(2):
        ext, swp = naive_regrets(STOP_LIGHT_TABLE, tr.profiles, i, 3)
        assert external_regret(tr, i) == pytest.approx(ext, abs=1e-9)
        assert swap_regret(tr, i) == pytest.approx(swp, abs=1e-9)


def test_regret_on_best_fixed_action(pennies):
    # row always Heads against an always-Heads column: Heads is the best fixed action
    tr = LearnerTrace(pennies, (LearnerSpec(),) * 2, np.zeros((10, 2), dtype=np.int64), np.zeros((10, 2, 2)), np.zeros((10, 2), bool))
    assert external_regret(tr, 0) == 0


def test_alternating_swap_regret(pennies):
    # row alternates H, T; column always matched
    prof = np.array([[0, 0], [1, 1]] * 5, dtype=np.int64)
    tr = LearnerTrace(pennies, (LearnerSpec(),) * 2, prof, np.zeros((10, 2, 2)), np.zeros((10, 2), bool))
    ext, swp = naive_regrets({p: tuple(pennies.payoffs[p]) for p in pennies.profiles()}, prof, 1, 2)
    assert swap_regret(tr, 1) == pytest.approx(swp) == 20.0
    # fixed Heads mismatches the five Tails rounds: +2 each
    assert external_regret(tr, 1) == pytest.approx(ext) == 10.0
    assert swap_regret(tr, 0) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["regret_matching", "hedge", "swap_regret", "pgd"]))
def test_regret_certificates(seed, alg):
    g = build_stop_light()
    tr = run_self_play(g, alg, 200, seed=seed)
    ext = max(external_regret(tr, i) for i in range(2))
    swp = max(swap_regret(tr, i) for i in range(2))
    assert swp >= ext - 1e-9
    # realized-payoff regret can be negative while epsilon is clamped at 0
    assert float(cce_epsilon(g, tr.empirical_distribution)) == pytest.approx(max(ext, 0.0) / tr.T, abs=1e-9)
    assert float(certify_ce(tr)) <= swp / tr.T + 1e-9


def test_rm_example_seed1(stop_light):
    tr = run_self_play(stop_light, "regret_matching", 10_000, seed=1)
    assert max(external_regret(tr, i) for i in range(2)) / tr.T <= 0.05


def test_rm_example_seed7_certified(stop_light):
    tr = run_self_play(stop_light, "regret_matching", 10_000, seed=7)
    bound = max(external_regret(tr, i) for i in range(2)) / tr.T
    assert float(certify_cce(tr)) <= bound + 1e-9


def test_hedge_example(stop_light):
    T = 10_000
    spec = LearnerSpec("hedge", learning_rate=math.sqrt(8 * math.log(3) / T))
    tr = run_self_play(stop_light, spec, T, seed=0)
    assert float(certify_cce(tr)) <= 0.05


def test_pgd_example(stop_light):
    tr = run_self_play(stop_light, "pgd", 10_000, seed=0)
    assert float(certify_cce(tr)) <= 0.1


def test_trace_exports(stop_light):
    tr = run_self_play(stop_light, "regret_matching", 50, seed=3)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,action_0,action_1,external_regret_0,external_regret_1"
    assert len(lines) == 51
    last = lines[-1].split(",")
    assert float(last[3]) == pytest.approx(external_regret(tr, 0))
    summ = tr.summary()
    assert summ["T"] == 50 and set(summ) >= {"external_regret", "swap_regret", "cce_epsilon", "empirical_distribution"}
