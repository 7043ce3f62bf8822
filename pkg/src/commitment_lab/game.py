"""Finite normal-form games with exact rational payoffs.

Player 0 is Row and player 1 is Column in every built-in two-player table;
profiles are tuples of action indices in player order.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType

import numpy as np

from ._exact import fraction_str, to_fraction

Profile = tuple[int, ...]


class GameError(ValueError):
    """Malformed game, profile or distribution."""


class InvalidProfileError(GameError, IndexError):
    pass


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """A finite game whose payoff tensor has shape ``(*n_actions, n_players)``.

    Payoffs are stored as :class:`~fractions.Fraction` objects in a read-only
    object array; :attr:`float_payoffs` is the cached float64 view used by the
    learning kernels.
    """

    action_labels: tuple[tuple[str, ...], ...]
    payoffs: np.ndarray
    name: str = ""
    player_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        labels = tuple(tuple(str(a) for a in acts) for acts in self.action_labels)
        if not labels:
            raise GameError("a game needs at least one player")
        for i, acts in enumerate(labels):
            if not acts:
                raise GameError(f"player {i} has no actions")
            if len(set(acts)) != len(acts):
                raise GameError(f"player {i} has duplicate action labels {acts}")
        shape = tuple(len(a) for a in labels) + (len(labels),)
        arr = np.asarray(self.payoffs, dtype=object)
        if arr.shape != shape:
            raise GameError(f"payoff tensor has shape {arr.shape}, expected {shape}")
        exact = np.empty(shape, dtype=object)
        for idx, val in np.ndenumerate(arr):
            exact[idx] = to_fraction(val)
        exact.setflags(write=False)
        names = tuple(self.player_names) or tuple(f"P{i}" for i in range(len(labels)))
        if len(names) != len(labels):
            raise GameError("player_names length does not match the number of players")
        object.__setattr__(self, "action_labels", labels)
        object.__setattr__(self, "payoffs", exact)
        object.__setattr__(self, "player_names", names)

    @property
    def n_players(self) -> int:
        return len(self.action_labels)

    @property
    def n_actions(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.action_labels)

    @property
    def n_profiles(self) -> int:
        return int(np.prod(self.n_actions))

    def profiles(self):
        """Iterate over every pure profile in C order."""
        return itertools.product(*(range(m) for m in self.n_actions))

    def action_index(self, player: int, action) -> int:
        """Accept an index or a label and return the index."""
        self._check_player(player)
        if isinstance(action, (int, np.integer)) and not isinstance(action, bool):
            if not 0 <= action < self.n_actions[player]:
                raise InvalidProfileError(f"action {action} out of range for player {player}")
            return int(action)
        try:
            return self.action_labels[player].index(str(action))
        except ValueError:
            raise InvalidProfileError(
                f"player {player} has no action {action!r}; known {self.action_labels[player]}"
            ) from None

    def profile(self, *actions) -> Profile:
        """Build a validated profile from indices or labels."""
        if len(actions) == 1 and isinstance(actions[0], (tuple, list)):
            actions = tuple(actions[0])
        if len(actions) != self.n_players:
            raise InvalidProfileError(f"profile {actions} has wrong length for {self.n_players} players")
        return tuple(self.action_index(i, a) for i, a in enumerate(actions))

    def validate_profile(self, profile: Sequence[int]) -> Profile:
        if len(profile) != self.n_players:
            raise InvalidProfileError(f"profile {tuple(profile)} has wrong length")
        out = []
        for i, a in enumerate(profile):
            if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
                raise InvalidProfileError(f"profile entry {a!r} is not an action index")
            if not 0 <= a < self.n_actions[i]:
                raise InvalidProfileError(f"action {a} out of range for player {i}")
            out.append(int(a))
        return tuple(out)

    def labels_of(self, profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.action_labels[i][a] for i, a in enumerate(profile))

    def _check_player(self, player: int) -> None:
        if isinstance(player, bool) or not 0 <= player < self.n_players:
            raise GameError(f"player index {player} out of range")

    @cached_property
    def float_payoffs(self) -> np.ndarray:
        arr = np.array(self.payoffs.tolist(), dtype=float).reshape(self.payoffs.shape)
        arr.setflags(write=False)
        return arr

    def scaled(self, c) -> NormalFormGame:
        """Return a copy with every payoff multiplied by ``c``."""
        c = to_fraction(c)
        return NormalFormGame(self.action_labels, self.payoffs * c, f"{self.name}*{c}", self.player_names)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "players": self.n_players,
            "actions": [list(a) for a in self.action_labels],
            "payoffs": _nested_str(self.payoffs),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: Mapping) -> NormalFormGame:
        unknown = set(doc) - {"name", "players", "actions", "payoffs"}
        if unknown:
            raise GameError(f"unknown game fields: {sorted(unknown)}")
        try:
            actions = doc["actions"]
            payoffs = doc["payoffs"]
        except KeyError as e:
            raise GameError(f"game document missing field {e.args[0]!r}") from None
        players = doc.get("players", len(actions))
        names = ()
        if isinstance(players, list):
            names = tuple(players)
            players = len(players)
        if players != len(actions):
            raise GameError(f"players={players} but {len(actions)} action lists given")
        shape = tuple(len(a) for a in actions) + (players,)
        arr = np.empty(shape, dtype=object)
        try:
            flat = np.array(payoffs, dtype=object)
            if flat.shape != shape:
                raise GameError(f"payoffs have shape {flat.shape}, expected {shape}")
            for idx, val in np.ndenumerate(flat):
                arr[idx] = to_fraction(val)
        except (TypeError, ZeroDivisionError) as e:
            raise GameError(f"bad payoff entry: {e}") from None
        return cls(tuple(tuple(a) for a in actions), arr, doc.get("name", ""), names)

    @classmethod
    def from_json(cls, text: str) -> NormalFormGame:
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, NormalFormGame):
            return NotImplemented
        return self.action_labels == other.action_labels and bool(np.all(self.payoffs == other.payoffs))

    __hash__ = None

    def __repr__(self):
        return f"NormalFormGame(name={self.name!r}, actions={self.action_labels})"


def _nested_str(arr):
    if not isinstance(arr, np.ndarray):
        return fraction_str(arr)
    return [_nested_str(sub) for sub in arr]


def payoff(game: NormalFormGame, profile: Sequence[int]) -> tuple[Fraction, ...]:
    """Return the payoff vector stored at ``profile``."""
    p = game.validate_profile(profile)
    return tuple(game.payoffs[p])


class JointDistribution(Mapping):
    """Read-only map from profile to probability.

    Zero weights are dropped. Exact rational weights must sum to exactly 1;
    float weights within 1e-12.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[Profile, object] | Sequence[tuple[Profile, object]]):
        items = weights.items() if isinstance(weights, Mapping) else weights
        merged: dict[Profile, object] = {}
        for prof, w in items:
            prof = tuple(int(a) for a in prof)
            if not isinstance(w, (float, np.floating)):
                w = to_fraction(w)
            if w < 0:
                raise GameError(f"negative weight {w} on {prof}")
            if w == 0:
                continue
            merged[prof] = merged.get(prof, 0) + w
        total = sum(merged.values())
        exact = all(isinstance(w, Fraction) for w in merged.values())
        if not merged or (total != 1 if exact else abs(float(total) - 1.0) > 1e-12):
            raise GameError(f"weights sum to {total}, not 1")
        self._weights = MappingProxyType(dict(sorted(merged.items())))

    def __getitem__(self, profile):
        return self._weights.get(tuple(profile), Fraction(0))

    def __iter__(self):
        return iter(self._weights)

    def __len__(self):
        return len(self._weights)

    def __eq__(self, other):
        if isinstance(other, JointDistribution):
            return dict(self._weights) == dict(other._weights)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._weights.items()))

    def __repr__(self):
        body = ", ".join(f"{p}: {w}" for p, w in self._weights.items())
        return f"JointDistribution({{{body}}})"

    @property
    def is_exact(self) -> bool:
        return all(isinstance(w, Fraction) for w in self._weights.values())

    @classmethod
    def point_mass(cls, profile: Sequence[int]) -> JointDistribution:
        return cls({tuple(profile): Fraction(1)})

    @classmethod
    def uniform(cls, game: NormalFormGame) -> JointDistribution:
        w = Fraction(1, game.n_profiles)
        return cls({p: w for p in game.profiles()})

    @classmethod
    def from_counts(cls, counts: Mapping[Profile, int]) -> JointDistribution:
        total = sum(counts.values())
        return cls({p: Fraction(int(c), int(total)) for p, c in counts.items()})

    def check(self, game: NormalFormGame) -> None:
        for p in self._weights:
            game.validate_profile(p)

    def marginal(self, player: int) -> dict[int, object]:
        out: dict[int, object] = {}
        for p, w in self._weights.items():
            out[p[player]] = out.get(p[player], 0) + w
        return out

    def to_dict(self, game: NormalFormGame | None = None) -> list[dict]:
        rows = []
        for p, w in self._weights.items():
            row = {"profile": list(p), "weight": fraction_str(w) if isinstance(w, Fraction) else float(w)}
            if game is not None:
                row["labels"] = list(game.labels_of(p))
            rows.append(row)
        return rows


def expected_payoff(game: NormalFormGame, dist: JointDistribution, player: int):
    """Return the expectation of ``player``'s payoff under ``dist``."""
    game._check_player(player)
    dist.check(game)
    return sum((w * game.payoffs[p][player] for p, w in dist.items()), Fraction(0))


def build_stop_light() -> NormalFormGame:
    """The three-action stop light coordination game (Fast, Caution, Stop)."""
    cc = Fraction(21, 10)
    table = [
        [(0, 0), (3, 1), (7, 2)],
        [(1, 3), (cc, cc), (6, 2)],
        [(2, 7), (2, 6), (4, 4)],
    ]
    acts = ("Fast", "Caution", "Stop")
    return NormalFormGame((acts, acts), np.array(table, dtype=object), "stop_light", ("Row", "Column"))


def build_matching_pennies() -> NormalFormGame:
    """Zero-sum 2x2: Row wins on a match, Column on a mismatch."""
    table = [[(1, -1), (-1, 1)], [(-1, 1), (1, -1)]]
    acts = ("Heads", "Tails")
    return NormalFormGame((acts, acts), np.array(table, dtype=object), "matching_pennies", ("Row", "Column"))


def build_congestion(n_players: int, latencies: Sequence[tuple[object, object]]) -> NormalFormGame:
    """Route-choice game with affine latency ``a_r * k + b_r``.

    Each player picks one route; ``k`` is the number of players on it and the
    payoff is the negated latency.
    """
    if n_players < 1:
        raise GameError("congestion game needs at least one player")
    routes = [(to_fraction(a), to_fraction(b)) for a, b in latencies]
    if not routes:
        raise GameError("congestion game needs at least one route")
    if any(a < 0 for a, _ in routes):
        raise GameError("latency slopes must be nonnegative")
    m = len(routes)
    shape = (m,) * n_players + (n_players,)
    arr = np.empty(shape, dtype=object)
    for prof in itertools.product(range(m), repeat=n_players):
        load = [0] * m
        for r in prof:
            load[r] += 1
        for i, r in enumerate(prof):
            a, b = routes[r]
            arr[prof + (i,)] = -(a * load[r] + b)
    labels = tuple(f"route{r + 1}" for r in range(m))
    return NormalFormGame((labels,) * n_players, arr, f"congestion_{n_players}x{m}")


BUILTIN_GAMES = {
    "stop_light": build_stop_light,
    "matching_pennies": build_matching_pennies,
}


def builtin_game(name: str) -> NormalFormGame:
    try:
        return BUILTIN_GAMES[name]()
    except KeyError:
        raise GameError(f"unknown built-in game {name!r}; known: {sorted(BUILTIN_GAMES)}") from None
