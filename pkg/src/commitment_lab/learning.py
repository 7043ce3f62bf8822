"""No-regret dynamics and their certification against equilibrium sets.

Four learners are available: regret matching, Hedge, the swap-regret
reduction over regret-matching sub-learners, and projected gradient ascent.
Feedback is full information: after each round a player sees what every
one of its own actions would have earned against the others' realized
actions.

The per-round ``*_step`` functions are the reference definitions;
:func:`run_self_play` runs the same updates through a compiled kernel (see
:mod:`commitment_lab.kernels`).
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import kernels
from ._exact import format_float, fraction_str
from .equilibrium import cce_epsilon, ce_epsilon
from .game import JointDistribution, NormalFormGame
from .mediation import device_from_distribution

ALGORITHMS = {"regret_matching": 0, "hedge": 1, "swap_regret": 2, "pgd": 3}


class LearnerError(ValueError):
    pass


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise LearnerError("projection needs a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise LearnerError("projection input must be finite")
    return kernels._np.project_to_simplex(v)


@dataclass(frozen=True)
class LearnerState:
    algorithm: str
    strategy: np.ndarray
    regrets: np.ndarray | None = None
    log_weights: np.ndarray | None = None
    sub_regrets: np.ndarray | None = None
    sub_strategies: np.ndarray | None = None
    t: int = 0
    singular: bool = False

    @classmethod
    def initial(cls, algorithm: str, n_actions: int, strategy=None) -> LearnerState:
        if algorithm not in ALGORITHMS:
            raise LearnerError(f"unknown algorithm {algorithm!r}; known {sorted(ALGORITHMS)}")
        s = np.full(n_actions, 1.0 / n_actions) if strategy is None else np.asarray(strategy, dtype=float)
        return cls(
            algorithm,
            s,
            regrets=np.zeros(n_actions),
            log_weights=np.zeros(n_actions),
            sub_regrets=np.zeros((n_actions, n_actions)),
            sub_strategies=np.full((n_actions, n_actions), 1.0 / n_actions),
        )

    @property
    def n_actions(self) -> int:
        return self.strategy.shape[0]


def _payoff_vector(state, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (state.n_actions,):
        raise LearnerError(f"payoff vector has shape {v.shape}, expected ({state.n_actions},)")
    if not np.all(np.isfinite(v)):
        raise LearnerError("payoff vector has non-finite entries")
    return v


def regret_matching_step(state: LearnerState, payoffs) -> LearnerState:
    v = _payoff_vector(state, payoffs)
    regrets = state.regrets + v - state.strategy @ v
    return replace(state, regrets=regrets, strategy=kernels._np.regret_matching_strategy(regrets), t=state.t + 1)


def hedge_step(state: LearnerState, payoffs, learning_rate: float) -> LearnerState:
    if not learning_rate > 0:
        raise LearnerError("learning rate must be positive")
    v = _payoff_vector(state, payoffs)
    logw = state.log_weights + learning_rate * v
    return replace(state, log_weights=logw, strategy=kernels._np.softmax(logw), t=state.t + 1)


def swap_regret_step(state: LearnerState, payoffs) -> LearnerState:
    """Blum-Mansour reduction: sub-learner ``j`` sees payoffs scaled by ``p(j)``."""
    v = _payoff_vector(state, payoffs)
    ev = state.sub_strategies @ v
    sub_regrets = state.sub_regrets + state.strategy[:, None] * (v[None, :] - ev[:, None])
    sub = np.array([kernels._np.regret_matching_strategy(r) for r in sub_regrets])
    p, singular = kernels._np.stationary_distribution(sub)
    return replace(state, sub_regrets=sub_regrets, sub_strategies=sub, strategy=p, t=state.t + 1, singular=singular)


def stationary_distribution(q) -> tuple[np.ndarray, bool]:
    """Stationary distribution of a row-stochastic matrix (uniform + flag if not unique)."""
    return kernels._np.stationary_distribution(np.asarray(q, dtype=float))


def pgd_step(state: LearnerState, gradient, step_size: float) -> LearnerState:
    if not step_size > 0:
        raise LearnerError("step size must be positive")
    g = _payoff_vector(state, gradient)
    return replace(state, strategy=project_to_simplex(state.strategy + step_size * g), t=state.t + 1)


@dataclass(frozen=True)
class LearnerSpec:
    """Which learner a player runs.

    ``learning_rate`` is Hedge's rate (default ``sqrt(8 ln|A| / T)``);
    ``step_scale`` is PGD's ``c`` in the step ``c / sqrt(t)`` (default
    ``1 / payoff range``).
    """

    algorithm: str = "regret_matching"
    learning_rate: float | None = None
    step_scale: float | None = None
    initial_strategy: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise LearnerError(f"unknown algorithm {self.algorithm!r}; known {sorted(ALGORITHMS)}")
        for name in ("learning_rate", "step_scale"):
            val = getattr(self, name)
            if val is not None and not (math.isfinite(val) and val > 0):
                raise LearnerError(f"{name} must be positive, got {val}")

    def parameter(self, game: NormalFormGame, player: int, T: int) -> float:
        m = game.n_actions[player]
        if self.algorithm == "hedge":
            return self.learning_rate if self.learning_rate is not None else math.sqrt(8 * math.log(max(m, 2)) / T)
        if self.algorithm == "pgd":
            if self.step_scale is not None:
                return self.step_scale
            u = game.float_payoffs[..., player]
            span = float(u.max() - u.min())
            return 1.0 / span if span > 0 else 1.0
        return 0.0


def _flat_game(game: NormalFormGame):
    n_actions = np.array(game.n_actions, dtype=np.int64)
    strides = np.ones(game.n_players, dtype=np.int64)
    for i in range(game.n_players - 2, -1, -1):
        strides[i] = strides[i + 1] * n_actions[i + 1]
    flat = np.ascontiguousarray(np.moveaxis(game.float_payoffs, -1, 0).reshape(game.n_players, -1))
    return flat, n_actions, strides


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


@dataclass(frozen=True, eq=False)
class LearnerTrace:
    game: NormalFormGame
    specs: tuple[LearnerSpec, ...]
    profiles: np.ndarray  # (T, n) realized actions
    strategies: np.ndarray  # (T, n, max actions) mixed strategies played
    singular_rounds: np.ndarray  # (T, n) swap solves that fell back to uniform
    seed: object = None
    backend: str = ""

    @property
    def T(self) -> int:
        return self.profiles.shape[0]

    @cached_property
    def empirical_distribution(self) -> JointDistribution:
        counts = Counter(map(tuple, self.profiles.tolist()))
        return JointDistribution.from_counts(counts)

    def _flat(self):
        return _flat_game(self.game)

    def counterfactual_payoffs(self, player: int) -> tuple[np.ndarray, np.ndarray]:
        """(T, m) payoffs of each own action against the realized others, and (T,) realized payoffs."""
        flat, n_actions, strides = self._flat()
        idx = self.profiles @ strides
        base = idx - self.profiles[:, player] * strides[player]
        cf = flat[player][base[:, None] + np.arange(n_actions[player])[None, :] * strides[player]]
        return cf, flat[player][idx]

    def running_external_regret(self, player: int) -> np.ndarray:
        cf, real = self.counterfactual_payoffs(player)
        return np.cumsum(cf - real[:, None], axis=0).max(axis=1)

    def to_csv(self) -> str:
        """One row per round: t, each player's action label and cumulative external regret."""
        n = self.game.n_players
        regs = [self.running_external_regret(i) for i in range(n)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"action_{i}" for i in range(n)] + [f"external_regret_{i}" for i in range(n)])
        for t in range(self.T):
            prof = self.profiles[t]
            w.writerow(
                [t + 1]
                + [self.game.action_labels[i][prof[i]] for i in range(n)]
                + [format_float(regs[i][t]) for i in range(n)]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        n = self.game.n_players
        ext = [external_regret(self, i) for i in range(n)]
        swp = [swap_regret(self, i) for i in range(n)]
        return {
            "T": self.T,
            "algorithms": [s.algorithm for s in self.specs],
            "external_regret": ext,
            "swap_regret": swp,
            "max_avg_external_regret": max(ext) / self.T,
            "max_avg_swap_regret": max(swp) / self.T,
            "empirical_distribution": self.empirical_distribution.to_dict(self.game),
            "cce_epsilon": fraction_str(certify_cce(self)),
            "ce_epsilon_joint": fraction_str(certify_ce(self)),
            "ce_epsilon_conditional": fraction_str(certify_ce(self, weighting="conditional")),
            "singular_rounds": int(self.singular_rounds.sum()),
        }


def run_self_play(game: NormalFormGame, specs, T: int, seed=0, backend: str | None = None) -> LearnerTrace:
    """Simulate ``T`` rounds of simultaneous play; deterministic in ``seed``.

    ``specs`` is one :class:`LearnerSpec` (or algorithm name) per player, or a
    single one shared by all players.
    """
    if T < 1:
        raise LearnerError("T must be at least 1")
    if isinstance(specs, (str, LearnerSpec)):
        specs = [specs] * game.n_players
    specs = tuple(s if isinstance(s, LearnerSpec) else LearnerSpec(s) for s in specs)
    if len(specs) != game.n_players:
        raise LearnerError(f"need {game.n_players} learner specs, got {len(specs)}")
    flat, n_actions, strides = _flat_game(game)
    amax = int(n_actions.max())
    init = np.zeros((game.n_players, amax))
    for i, s in enumerate(specs):
        m = n_actions[i]
        if s.initial_strategy is None:
            init[i, :m] = 1.0 / m
        else:
            x = np.asarray(s.initial_strategy, dtype=float)
            if x.shape != (m,) or np.any(x < 0) or abs(x.sum() - 1.0) > 1e-12:
                raise LearnerError(f"initial strategy for player {i} is not a distribution over {m} actions")
            init[i, :m] = x
    algos = np.array([ALGORITHMS[s.algorithm] for s in specs], dtype=np.int64)
    params = np.array([s.parameter(game, i, T) for i, s in enumerate(specs)], dtype=float)
    uniforms = np.random.default_rng(_seed_sequence(seed)).random((T, game.n_players))
    module = kernels.get_backend(backend)
    profiles, history, flags = module.self_play(flat, n_actions, strides, algos, params, init, uniforms)
    return LearnerTrace(game, specs, profiles, history, flags, seed, kernels.backend_name(module))


def external_regret(trace: LearnerTrace, player: int) -> float:
    """Best fixed action in hindsight minus realized payoff, summed over rounds."""
    cf, real = trace.counterfactual_payoffs(player)
    return float((cf.sum(axis=0) - real.sum()).max())


def swap_regret(trace: LearnerTrace, player: int) -> float:
    """Best action-swap map in hindsight; separable, so a max per played action."""
    cf, real = trace.counterfactual_payoffs(player)
    played = trace.profiles[:, player]
    total = 0.0
    for r in np.unique(played):
        rows = played == r
        total += float((cf[rows].sum(axis=0) - real[rows].sum()).max())
    return total


def certify_cce(trace: LearnerTrace):
    return cce_epsilon(trace.game, trace.empirical_distribution)


def induced_device(trace: LearnerTrace):
    """Signals are realized profiles, recommendations the actions played."""
    return device_from_distribution(trace.empirical_distribution, trace.game)


def certify_ce(trace: LearnerTrace, weighting: str = "joint"):
    return ce_epsilon(trace.game, induced_device(trace), weighting=weighting)
