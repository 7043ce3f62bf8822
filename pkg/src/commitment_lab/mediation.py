"""Signal devices and what a strategic mediator can do with them.

A device draws a signal from its declared distribution and hands each player
the action recommended under that signal. This module covers honest
sampling, bribed (fixed or reweighted) mediators, second-price auctions with
an auctioneer who inserts a shill bid, and a likelihood-ratio audit of
observed signal counts.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from ._exact import fraction_str, to_fraction
from .game import JointDistribution, NormalFormGame, expected_payoff


class DeviceError(ValueError):
    pass


@dataclass(frozen=True)
class SignalDevice:
    signals: tuple[str, ...]
    probabilities: tuple[Fraction, ...]
    recommendations: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        signals = tuple(str(s) for s in self.signals)
        probs = tuple(to_fraction(p) for p in self.probabilities)
        recs = tuple(tuple(int(a) for a in r) for r in self.recommendations)
        if not signals:
            raise DeviceError("device has no signals")
        if len(set(signals)) != len(signals):
            raise DeviceError(f"duplicate signal labels {signals}")
        if len(probs) != len(signals) or len(recs) != len(signals):
            raise DeviceError("signals, probabilities and recommendations differ in length")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise DeviceError(f"probabilities {probs} are not a distribution")
        if len({len(r) for r in recs}) != 1:
            raise DeviceError("every signal needs a recommendation for every player")
        object.__setattr__(self, "signals", signals)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "recommendations", recs)

    @property
    def n_players(self) -> int:
        return len(self.recommendations[0])

    def index(self, signal: str) -> int:
        try:
            return self.signals.index(signal)
        except ValueError:
            raise DeviceError(f"unknown signal {signal!r}; known {self.signals}") from None

    def check(self, game: NormalFormGame) -> None:
        if self.n_players != game.n_players:
            raise DeviceError(f"device is for {self.n_players} players, game has {game.n_players}")
        for rec in self.recommendations:
            game.validate_profile(rec)

    def recommendation_probability(self, player: int, action: int) -> Fraction:
        return sum((p for p, r in zip(self.probabilities, self.recommendations) if r[player] == action), Fraction(0))

    def to_dict(self, game: NormalFormGame | None = None) -> dict:
        recs = {}
        for s, r in zip(self.signals, self.recommendations):
            recs[s] = list(game.labels_of(r)) if game is not None else list(r)
        return {
            "signals": list(self.signals),
            "probabilities": [fraction_str(p) for p in self.probabilities],
            "recommendations": recs,
        }

    def to_json(self, game: NormalFormGame | None = None, **kw) -> str:
        return json.dumps(self.to_dict(game), **kw)

    @classmethod
    def from_dict(cls, doc: Mapping, game: NormalFormGame | None = None) -> SignalDevice:
        unknown = set(doc) - {"signals", "probabilities", "recommendations"}
        if unknown:
            raise DeviceError(f"unknown device fields: {sorted(unknown)}")
        try:
            signals = list(doc["signals"])
            probs = [to_fraction(p) for p in doc["probabilities"]]
            raw = doc["recommendations"]
        except KeyError as e:
            raise DeviceError(f"device document missing field {e.args[0]!r}") from None
        if isinstance(raw, Mapping):
            missing = [s for s in signals if s not in raw]
            if missing:
                raise DeviceError(f"no recommendation for signals {missing}")
            raw = [raw[s] for s in signals]
        recs = []
        for rec in raw:
            if game is not None:
                recs.append(game.profile(*rec))
            elif all(isinstance(a, int) for a in rec):
                recs.append(tuple(rec))
            else:
                raise DeviceError("label recommendations need a game to resolve against")
        dev = cls(tuple(signals), tuple(probs), tuple(recs))
        if game is not None:
            dev.check(game)
        return dev

    @classmethod
    def from_json(cls, text: str, game: NormalFormGame | None = None) -> SignalDevice:
        return cls.from_dict(json.loads(text), game)


def build_stop_light_device() -> SignalDevice:
    """The four-signal stop light device.

    Each label names (Column, Row) recommendations: under ``FS`` Column is
    told Fast and Row is told Stop.
    """
    fast, caution, stop = 0, 1, 2
    third, sixth = Fraction(1, 3), Fraction(1, 6)
    return SignalDevice(
        ("FS", "SF", "SC", "CS"),
        (third, third, sixth, sixth),
        ((stop, fast), (fast, stop), (caution, stop), (stop, caution)),
    )


BUILTIN_DEVICES = {"stop_light": build_stop_light_device}


def builtin_device(name: str) -> SignalDevice:
    try:
        return BUILTIN_DEVICES[name]()
    except KeyError:
        raise DeviceError(f"unknown built-in device {name!r}; known: {sorted(BUILTIN_DEVICES)}") from None


def point_mass_device(profile: Sequence[int], label: str | None = None) -> SignalDevice:
    profile = tuple(int(a) for a in profile)
    return SignalDevice((label or "|".join(map(str, profile)),), (Fraction(1),), (profile,))


def device_from_distribution(dist: JointDistribution, game: NormalFormGame | None = None) -> SignalDevice:
    """One signal per supported profile, recommending that profile."""
    profiles = list(dist)
    labels = ["|".join(game.labels_of(p)) if game is not None else "|".join(map(str, p)) for p in profiles]
    weights = [dist[p] for p in profiles]
    if not all(isinstance(w, Fraction) for w in weights):
        weights = [to_fraction(float(w)) for w in weights]
        weights[-1] = 1 - sum(weights[:-1])
    return SignalDevice(tuple(labels), tuple(weights), tuple(profiles))


def outcome_distribution(device: SignalDevice) -> JointDistribution:
    """Exact pushforward of the signal distribution through the recommendations."""
    return JointDistribution(list(zip(device.recommendations, device.probabilities)))


def sample_signal(device: SignalDevice, rng: np.random.Generator) -> str:
    return device.signals[_sample_index(device, rng)]


def sample_signals(device: SignalDevice, rng: np.random.Generator, n: int) -> list[str]:
    u = rng.random(n)
    cdf = np.cumsum([float(p) for p in device.probabilities])
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return [device.signals[i] for i in idx]


def _sample_index(device, rng):
    u = rng.random()
    c = 0.0
    last = 0
    for k, p in enumerate(device.probabilities):
        if p > 0:
            last = k
        c += float(p)
        if u < c:
            return k
    return last


@dataclass(frozen=True)
class MediatorPolicy:
    """What the mediator actually samples from.

    ``kind`` is ``"honest"``, ``"fixed_signal"`` (with ``signal``) or
    ``"reweighted"`` (with ``weights``). ``side_payment`` is the per-draw bribe.
    """

    kind: str = "honest"
    signal: str | None = None
    weights: tuple[Fraction, ...] | None = None
    side_payment: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("honest", "fixed_signal", "reweighted"):
            raise DeviceError(f"unknown mediator policy kind {self.kind!r}")
        if self.kind == "fixed_signal" and self.signal is None:
            raise DeviceError("fixed_signal policy needs a signal")
        if self.kind == "reweighted":
            if self.weights is None:
                raise DeviceError("reweighted policy needs weights")
            w = tuple(to_fraction(x) for x in self.weights)
            if any(x < 0 for x in w) or sum(w) != 1:
                raise DeviceError(f"reweighted policy weights {w} are not a distribution")
            object.__setattr__(self, "weights", w)
        object.__setattr__(self, "side_payment", to_fraction(self.side_payment))


def apply_mediator_policy(device: SignalDevice, policy: MediatorPolicy) -> SignalDevice:
    if policy.kind == "honest":
        return device
    if policy.kind == "fixed_signal":
        k = device.index(policy.signal)
        probs = tuple(Fraction(int(j == k)) for j in range(len(device.signals)))
    else:
        if len(policy.weights) != len(device.signals):
            raise DeviceError("reweighted policy does not match the device's signal set")
        probs = policy.weights
    return SignalDevice(device.signals, probs, device.recommendations)


@dataclass(frozen=True)
class BribeResult:
    signal: str
    best_payoff: Fraction
    honest_payoff: Fraction
    player_gain: Fraction
    mediator_surplus_bound: Fraction


def optimal_bribe(game: NormalFormGame, device: SignalDevice, colluding_player: int) -> BribeResult:
    """Best fixed signal for the colluder and what it is worth per draw.

    The colluder would pay up to its gain over honest play, so that gain is
    also the mediator's surplus bound. Ties go to the earliest signal.
    """
    device.check(game)
    honest = expected_payoff(game, outcome_distribution(device), colluding_player)
    best_k, best = 0, None
    for k, rec in enumerate(device.recommendations):
        val = game.payoffs[rec][colluding_player]
        if best is None or val > best:
            best_k, best = k, val
    gain = best - honest
    return BribeResult(device.signals[best_k], best, honest, gain, gain)


@dataclass(frozen=True)
class AuctionScenario:
    bids: tuple[Fraction, ...]
    tick: Fraction = Fraction(1, 100)
    auctioneer: str = "honest"

    def __post_init__(self):
        bids = tuple(to_fraction(b) for b in self.bids)
        tick = to_fraction(self.tick)
        if tick <= 0:
            raise DeviceError("tick must be positive")
        if self.auctioneer not in ("honest", "shill"):
            raise DeviceError(f"auctioneer must be 'honest' or 'shill', got {self.auctioneer!r}")
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "tick", tick)


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int
    price: Fraction
    honest_price: Fraction
    extraction: Fraction
    shill_bid: Fraction | None = None


def run_auction(scenario: AuctionScenario) -> AuctionOutcome:
    """Sealed-bid second-price auction, optionally with a shill bid.

    The shill auctioneer sees every bid and inserts one at ``top - tick``; it
    never lowers the price, so the shill only binds when that exceeds the
    second-highest genuine bid.
    """
    bids = scenario.bids
    if len(bids) < 2:
        raise DeviceError("an auction needs at least two bids")
    top = max(bids)
    winner = bids.index(top)
    second = max(b for k, b in enumerate(bids) if k != winner)
    if scenario.auctioneer == "honest":
        return AuctionOutcome(winner, second, second, Fraction(0))
    shill = top - scenario.tick
    price = max(second, shill)
    return AuctionOutcome(winner, price, second, price - second, shill)


@dataclass(frozen=True)
class AuditReport:
    observed_counts: tuple[int, ...]
    declared: tuple[Fraction, ...]
    log_likelihood_ratio: float
    threshold: float
    flagged: bool
    deviation_proven: bool

    def to_dict(self, signals: Sequence[str] | None = None) -> dict:
        return {
            "signals": list(signals) if signals is not None else None,
            "observed_counts": list(self.observed_counts),
            "declared": [fraction_str(p) for p in self.declared],
            "g_statistic": self.log_likelihood_ratio,
            "threshold": self.threshold,
            "flagged": self.flagged,
            "deviation_proven": self.deviation_proven,
        }


def default_audit_threshold(n_signals: int, level: float = 0.99) -> float:
    return float(stats.chi2.ppf(level, max(n_signals - 1, 1)))


def audit_signals(observed_counts: Sequence[int], declared: Sequence, threshold: float | None = None) -> AuditReport:
    """G-test of observed signal counts against the declared distribution.

    A high statistic only makes the mediator suspicious; deviation is proven
    only by observing a signal that was declared impossible.
    """
    counts = tuple(int(c) for c in observed_counts)
    probs = tuple(to_fraction(p) for p in declared)
    if len(counts) != len(probs):
        raise DeviceError("counts and declared probabilities differ in length")
    if any(p < 0 for p in probs) or sum(probs) != 1:
        raise DeviceError(f"declared vector {probs} is not a distribution")
    if any(c < 0 for c in counts) or sum(counts) == 0:
        raise DeviceError("counts must be nonnegative and not all zero")
    if threshold is None:
        threshold = default_audit_threshold(len(counts))
    n = sum(counts)
    proven = any(c > 0 and p == 0 for c, p in zip(counts, probs))
    if proven:
        g = math.inf
    else:
        terms = []
        for c, p in zip(counts, probs):
            if c == 0:
                continue
            ratio = Fraction(c) / (n * p)
            if ratio != 1:
                terms.append(c * math.log(ratio))
        g = 2.0 * math.fsum(terms) if terms else 0.0
    return AuditReport(counts, probs, g, float(threshold), g > threshold, proven)


def signal_counts(device: SignalDevice, draws: Sequence[str]) -> tuple[int, ...]:
    counts = [0] * len(device.signals)
    for s in draws:
        counts[device.index(s)] += 1
    return tuple(counts)
