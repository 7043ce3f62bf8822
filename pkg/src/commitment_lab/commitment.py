"""Commitment devices layered on top of a signal device.

* Penalty devices destroy (or transfer) a fixed amount whenever a player
  disobeys its recommendation.
* Program strategies are finite decision tables that may compare program
  identities and simulate the opponent to a bounded depth.
* Perception maps model a player who reads one signal as another.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from ._exact import to_fraction
from .equilibrium import conditional_deviation_gain, conditional_reports
from .game import JointDistribution, NormalFormGame, build_matching_pennies, expected_payoff
from .mediation import SignalDevice


@dataclass(frozen=True)
class PenaltyDevice:
    base_device: SignalDevice
    penalty: Fraction
    destination: str = "destroy"  # or "transfer": split among the other players

    def __post_init__(self):
        d = to_fraction(self.penalty)
        if d < 0:
            raise ValueError(f"penalty must be nonnegative, got {d}")
        if self.destination not in ("destroy", "transfer"):
            raise ValueError(f"unknown penalty destination {self.destination!r}")
        object.__setattr__(self, "penalty", d)


def penalized_conditional_gain(game: NormalFormGame, pdev: PenaltyDevice, player: int, recommended: int, alternative: int):
    if alternative == recommended:
        return Fraction(0)
    rep = conditional_deviation_gain(game, pdev.base_device, player, recommended, alternative)
    return rep.gain - pdev.penalty


def penalized_ce_gap(game: NormalFormGame, pdev: PenaltyDevice):
    """Largest raw penalized conditional gain (not clamped).

    ``<= 0`` means obedience is weakly optimal everywhere, ``< 0`` strictly.
    """
    return max(rep.gain - pdev.penalty for rep in conditional_reports(game, pdev.base_device))


def minimal_stabilizing_penalty(game: NormalFormGame, device: SignalDevice):
    """Smallest penalty making obedience weakly optimal at every recommendation.

    Any larger penalty makes it strictly optimal.
    """
    reps = conditional_reports(game, device)
    return max([Fraction(0)] + [r.gain for r in reps])


def penalized_payoffs(game: NormalFormGame, pdev: PenaltyDevice, signal: str, actions: Sequence[int]) -> tuple:
    """Realized payoffs once the device has punished disobedience."""
    rec = pdev.base_device.recommendations[pdev.base_device.index(signal)]
    profile = game.validate_profile(actions)
    out = list(game.payoffs[profile])
    n = game.n_players
    for i in range(n):
        if profile[i] != rec[i]:
            out[i] -= pdev.penalty
            if pdev.destination == "transfer" and n > 1:
                share = pdev.penalty / (n - 1)
                for j in range(n):
                    if j != i:
                        out[j] += share
    return tuple(out)


# -- program strategies ----------------------------------------------------

ANY = "*"
UNAVAILABLE = "unavailable"
RECOMMENDED = "@recommended"
SELF = "self"


@dataclass(frozen=True)
class Rule:
    """One row of a program's decision table; ``"*"`` matches anything.

    ``simulated`` is an opponent action label, ``"unavailable"`` (depth
    exhausted) or ``"*"``. ``action`` is an own action label or
    ``"@recommended"``.
    """

    action: str
    signal: str = ANY
    identity_match: bool | str = ANY
    simulated: str = ANY

    def matches(self, signal, match, simulated) -> bool:
        return (
            (self.signal == ANY or self.signal == signal)
            and (self.identity_match == ANY or self.identity_match == match)
            and (self.simulated == ANY or self.simulated == simulated)
        )

    def to_dict(self) -> dict:
        return {"signal": self.signal, "identity_match": self.identity_match, "simulated": self.simulated, "action": self.action}


@dataclass(frozen=True)
class ProgramStrategy:
    """A decision table evaluated top to bottom; no match means ``default_action``.

    ``expects`` is the opponent identity the program checks for: ``"self"``
    (an identical program), an explicit hash, or None (never matches).
    ``depth_budget`` caps how deep this program will simulate, whatever depth
    the caller allows.
    """

    name: str
    default_action: str
    rules: tuple[Rule, ...] = ()
    expects: str | None = SELF
    depth_budget: int = 8

    def __post_init__(self):
        if self.depth_budget < 0:
            raise ValueError("depth budget must be nonnegative")
        object.__setattr__(self, "rules", tuple(r if isinstance(r, Rule) else Rule(**r) for r in self.rules))

    def table(self) -> dict:
        """Canonical rule table; the name is not part of a program's identity."""
        return {
            "default_action": self.default_action,
            "rules": [r.to_dict() for r in self.rules],
            "expects": self.expects,
            "depth_budget": self.depth_budget,
        }

    @property
    def identity(self) -> str:
        canon = json.dumps(self.table(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @property
    def uses_simulation(self) -> bool:
        return any(r.simulated != ANY for r in self.rules)

    def to_dict(self) -> dict:
        return {"name": self.name, **self.table()}

    @classmethod
    def from_dict(cls, doc: Mapping) -> ProgramStrategy:
        unknown = set(doc) - {"name", "default_action", "rules", "expects", "depth_budget"}
        if unknown:
            raise ValueError(f"unknown program fields: {sorted(unknown)}")
        return cls(
            name=doc.get("name", ""),
            default_action=doc["default_action"],
            rules=tuple(Rule(**r) for r in doc.get("rules", ())),
            expects=doc.get("expects", SELF),
            depth_budget=int(doc.get("depth_budget", 8)),
        )


def _evaluate(me: ProgramStrategy, opp: ProgramStrategy, player: int, game, device, signal, depth):
    depth = min(depth, me.depth_budget)
    expected = me.identity if me.expects == SELF else me.expects
    match = expected is not None and expected == opp.identity
    if me.uses_simulation and depth > 0:
        opp_action = _evaluate(opp, me, 1 - player, game, device, signal, depth - 1)
        simulated = game.action_labels[1 - player][opp_action]
    else:
        simulated = UNAVAILABLE
    chosen = me.default_action
    for rule in me.rules:
        if rule.matches(signal, match, simulated):
            chosen = rule.action
            break
    if chosen == RECOMMENDED:
        if signal is None or device is None:
            chosen = me.default_action
        else:
            return device.recommendations[device.index(signal)][player]
    return game.action_index(player, chosen)


def execute_program_pair(
    p_row: ProgramStrategy,
    p_col: ProgramStrategy,
    game: NormalFormGame,
    signal: str | None = None,
    depth: int = 1,
    device: SignalDevice | None = None,
) -> tuple[int, int]:
    """Run two programs against each other and return the action profile.

    Each program simulates its opponent one level shallower than itself, so
    recursion ends at depth 0 where simulation is unavailable.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    return (
        _evaluate(p_row, p_col, 0, game, device, signal, depth),
        _evaluate(p_col, p_row, 1, game, device, signal, depth),
    )


def obey_if_identical(name: str = "obey_if_identical", fallback: str = "Stop") -> ProgramStrategy:
    return ProgramStrategy(name, fallback, (Rule(RECOMMENDED, identity_match=True),))


def copy_opponent(name: str = "matcher", default: str = "Heads", depth_budget: int = 8) -> ProgramStrategy:
    rules = (Rule("Heads", simulated="Heads"), Rule("Tails", simulated="Tails"))
    return ProgramStrategy(name, default, rules, expects=None, depth_budget=depth_budget)


def anti_copy_opponent(name: str = "anti_matcher", default: str = "Heads", depth_budget: int = 8) -> ProgramStrategy:
    rules = (Rule("Tails", simulated="Heads"), Rule("Heads", simulated="Tails"))
    return ProgramStrategy(name, default, rules, expects=None, depth_budget=depth_budget)


def matching_pennies_exploit_value(depth: int):
    """Column's payoff when a naive matcher (Row) faces an anti-matcher.

    The anti-matcher looks one level deeper than the matcher, so its
    simulation of Row is Row's actual move.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    game = build_matching_pennies()
    row = copy_opponent(depth_budget=depth)
    col = anti_copy_opponent(depth_budget=depth + 1)
    profile = execute_program_pair(row, col, game, None, depth + 1)
    return game.payoffs[profile][1]


def program_corpus(depth: int = 8) -> dict[str, ProgramStrategy]:
    """Built-in programs used by the ``duel`` scenario and the termination suite."""
    return {
        "obey_if_identical": obey_if_identical(),
        "always_obey": ProgramStrategy("always_obey", "Stop", (Rule(RECOMMENDED),), expects=None),
        "always_fast": ProgramStrategy("always_fast", "Fast", expects=None),
        "always_stop": ProgramStrategy("always_stop", "Stop", expects=None),
        "yield_to_fast": ProgramStrategy(
            "yield_to_fast", "Caution", (Rule("Stop", simulated="Fast"), Rule("Fast", simulated="Stop")), expects=None
        ),
        "mirror": ProgramStrategy(
            "mirror",
            "Stop",
            (Rule("Fast", simulated="Fast"), Rule("Caution", simulated="Caution"), Rule("Stop", simulated="Stop")),
            expects=None,
        ),
    }


# -- perception attacks ----------------------------------------------------


@dataclass(frozen=True)
class PerceptionMap:
    player: int
    mapping: Mapping[str, str] = field(default_factory=dict)

    def perceive(self, signal: str) -> str:
        return self.mapping.get(signal, signal)


def perception_attack_payoffs(game: NormalFormGame, device: SignalDevice, pmap: PerceptionMap) -> tuple:
    """Exact expected payoffs when ``pmap.player`` acts on misread signals.

    Signals missing from the mapping are read correctly.
    """
    device.check(game)
    for s, t in pmap.mapping.items():
        device.index(s)
        device.index(t)
    weights = []
    for s, prob, rec in zip(device.signals, device.probabilities, device.recommendations):
        seen = device.recommendations[device.index(pmap.perceive(s))]
        prof = rec[: pmap.player] + (seen[pmap.player],) + rec[pmap.player + 1:]
        weights.append((prof, prob))
    dist = JointDistribution(weights)
    return tuple(expected_payoff(game, dist, i) for i in range(game.n_players))


def penalty_sweep(game: NormalFormGame, device: SignalDevice, grid: Sequence) -> list[tuple[Fraction, Fraction]]:
    return [(to_fraction(d), penalized_ce_gap(game, PenaltyDevice(device, d))) for d in grid]


def matching_pennies_corpus(depth: int = 8) -> dict[str, ProgramStrategy]:
    """The naive matcher and an anti-matcher that looks one level deeper.

    Sized for a duel run at ``depth``: the anti-matcher uses all of it.
    """
    return {
        "matcher": copy_opponent(depth_budget=max(depth - 1, 0)),
        "anti_matcher": anti_copy_opponent(depth_budget=depth),
        "always_heads": ProgramStrategy("always_heads", "Heads", expects=None),
    }


CORPORA = {"stop_light": program_corpus, "matching_pennies": matching_pennies_corpus}
