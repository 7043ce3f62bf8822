"""Exact epsilon-CCE / epsilon-CE verification by deviation enumeration.

Gains are differences in expected payoff (positive means the deviation
pays). With rational payoffs and weights every quantity here is an exact
:class:`~fractions.Fraction`.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from ._exact import fraction_str
from .game import GameError, JointDistribution, NormalFormGame
from .mediation import SignalDevice

REPORT_COLUMNS = ("player", "kind", "detail", "gain", "occurrence_probability")


class UndefinedConditionalError(ValueError):
    """Conditioning on a recommendation the device never makes."""


@dataclass(frozen=True)
class DeviationReport:
    player: int
    kind: str  # "unconditional" | "conditional"
    detail: tuple
    gain: Fraction
    occurrence_probability: Fraction = Fraction(1)

    @property
    def weighted_gain(self):
        return self.gain * self.occurrence_probability

    @property
    def strictly_unprofitable(self) -> bool:
        return self.gain < 0

    def as_row(self, game: NormalFormGame | None = None) -> dict:
        labels = game.action_labels[self.player] if game is not None else None
        detail = "->".join(labels[a] if labels else str(a) for a in self.detail)
        return {
            "player": self.player,
            "kind": self.kind,
            "detail": detail,
            "gain": _num(self.gain),
            "occurrence_probability": _num(self.occurrence_probability),
        }


def _num(x):
    return fraction_str(x) if isinstance(x, Fraction) else float(x)


def reports_to_csv(reports, game: NormalFormGame | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.as_row(game))
    return buf.getvalue()


def reports_to_json(reports, game: NormalFormGame | None = None, **kw) -> str:
    return json.dumps([r.as_row(game) for r in reports], **kw)


def _check_player_action(game, player, action):
    game._check_player(player)
    if not 0 <= action < game.n_actions[player]:
        raise GameError(f"action {action} out of range for player {player}")


def _with_action(profile, player, action):
    return profile[:player] + (action,) + profile[player + 1:]


def unconditional_deviation_gain(game: NormalFormGame, dist: JointDistribution, player: int, action: int):
    """Expected gain from always playing ``action`` instead of obeying."""
    _check_player_action(game, player, action)
    dist.check(game)
    u = game.payoffs
    return sum(
        (w * (u[_with_action(p, player, action)][player] - u[p][player]) for p, w in dist.items()),
        Fraction(0),
    )


def _conditional_table(game: NormalFormGame, device: SignalDevice, player: int):
    """recommended action -> (P(recommended), {co-profile: weight})."""
    table: dict[int, list] = {}
    for prob, rec in zip(device.probabilities, device.recommendations):
        if prob == 0:
            continue
        entry = table.setdefault(rec[player], [Fraction(0), defaultdict(Fraction)])
        entry[0] += prob
        entry[1][rec] += prob
    return table


def _conditional_gain(game, player, recommended, alternative, occurrence, support):
    u = game.payoffs
    total = sum(
        (w * (u[_with_action(p, player, alternative)][player] - u[p][player]) for p, w in support.items()),
        Fraction(0),
    )
    return total / occurrence


def conditional_deviation_gain(
    game: NormalFormGame, device: SignalDevice, player: int, recommended: int, alternative: int
) -> DeviationReport:
    """Gain from playing ``alternative`` whenever told ``recommended``.

    The gain is the conditional expectation given the recommendation; the
    report also carries how often that recommendation is made.
    """
    _check_player_action(game, player, recommended)
    _check_player_action(game, player, alternative)
    device.check(game)
    table = _conditional_table(game, device, player)
    if recommended not in table:
        raise UndefinedConditionalError(
            f"player {player} is never recommended {game.action_labels[player][recommended]!r}"
        )
    occurrence, support = table[recommended]
    gain = _conditional_gain(game, player, recommended, alternative, occurrence, support)
    return DeviationReport(player, "conditional", (recommended, alternative), gain, occurrence)


def unconditional_reports(game: NormalFormGame, dist: JointDistribution) -> list[DeviationReport]:
    return [
        DeviationReport(i, "unconditional", (a,), unconditional_deviation_gain(game, dist, i, a))
        for i in range(game.n_players)
        for a in range(game.n_actions[i])
    ]


def conditional_reports(game: NormalFormGame, device: SignalDevice, include_identity: bool = False) -> list[DeviationReport]:
    """Every (player, made recommendation, alternative) deviation."""
    device.check(game)
    out = []
    for i in range(game.n_players):
        table = _conditional_table(game, device, i)
        for r in sorted(table):
            occurrence, support = table[r]
            for a in range(game.n_actions[i]):
                if a == r and not include_identity:
                    continue
                gain = _conditional_gain(game, i, r, a, occurrence, support)
                out.append(DeviationReport(i, "conditional", (r, a), gain, occurrence))
    return out


def cce_epsilon(game: NormalFormGame, dist: JointDistribution):
    """Largest unconditional deviation gain, clamped at 0 (0 iff exact CCE).

    Computed from each player's marginal over co-profiles, so the cost is
    linear in the support size rather than in the full profile space.
    """
    dist.check(game)
    u = game.payoffs
    best = Fraction(0)
    for i in range(game.n_players):
        others: dict[tuple, Fraction] = defaultdict(Fraction)
        obey = Fraction(0)
        for p, w in dist.items():
            obey += w * u[p][i]
            others[p[:i] + p[i + 1:]] += w
        for a in range(game.n_actions[i]):
            dev = sum((w * u[q[:i] + (a,) + q[i:]][i] for q, w in others.items()), Fraction(0))
            if dev - obey > best:
                best = dev - obey
    return best


def ce_epsilon(game: NormalFormGame, device: SignalDevice, weighting: str = "conditional"):
    """Largest conditional deviation gain, clamped at 0.

    ``weighting="conditional"`` (default) measures the gain per occurrence of
    the recommendation, so a rare but certain improvement counts in full.
    ``weighting="joint"`` multiplies by the recommendation's probability,
    which is the usual epsilon-CE constraint
    ``sum_{s: s_i = r} pi(s) (u_i(a, s_-i) - u_i(s)) <= eps`` and the form
    bounded by average swap regret.
    """
    if weighting not in ("conditional", "joint"):
        raise ValueError(f"weighting must be 'conditional' or 'joint', got {weighting!r}")
    best = Fraction(0)
    for rep in conditional_reports(game, device):
        g = rep.gain if weighting == "conditional" else rep.weighted_gain
        if g > best:
            best = g
    return best


def brute_force_best_response(game: NormalFormGame, player: int, opponent_marginal: Mapping[tuple, object]):
    """Score every action against a distribution over the others' co-profiles.

    Co-profiles omit ``player``'s own slot. Ties go to the lowest index.
    """
    game._check_player(player)
    total = sum(opponent_marginal.values())
    if abs(float(total) - 1.0) > 1e-12:
        raise GameError(f"opponent marginal sums to {total}")
    u = game.payoffs
    best_a, best_v = None, None
    for a in range(game.n_actions[player]):
        v = sum((w * u[tuple(q[:player]) + (a,) + tuple(q[player:])][player] for q, w in opponent_marginal.items()), Fraction(0))
        if best_v is None or v > best_v:
            best_a, best_v = a, v
    return best_a, best_v


def co_profile_marginal(dist: JointDistribution, player: int) -> dict[tuple, object]:
    out: dict[tuple, object] = defaultdict(Fraction)
    for p, w in dist.items():
        out[p[:player] + p[player + 1:]] += w
    return dict(out)
