"""Declarative scenarios: one JSON document in, one report out.

Every scenario kind composes the library modules; the report echoes the
validated config, its hash and the master seed, so a report is enough to
reproduce itself. Repetition ``k`` draws from
``SeedSequence(master_seed, spawn_key=(k,))``.

CSV columns per kind (stable):

========  ==================================================================
verify    repetition, player, kind, detail, gain, occurrence_probability
learn     repetition, T, max_avg_external_regret, max_avg_swap_regret,
          cce_epsilon, ce_epsilon_joint, ce_epsilon_conditional,
          singular_rounds
bribe     repetition, player, signal, best_payoff, honest_payoff,
          player_gain, mediator_surplus_bound
penalty   repetition, penalty, max_conditional_gain, obedience
duel      repetition, row_program, col_program, row_payoff, col_payoff,
          outcomes
auction   repetition, auction, winner, price, honest_price, extraction
audit     repetition, signal, observed, declared, g_statistic, flagged,
          deviation_proven
========  ==================================================================
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from . import kernels
from ._exact import format_float, fraction_str, to_fraction
from .commitment import (
    CORPORA,
    ProgramStrategy,
    execute_program_pair,
    minimal_stabilizing_penalty,
    penalty_sweep,
)
from .equilibrium import cce_epsilon, ce_epsilon, conditional_reports, unconditional_reports
from .game import NormalFormGame, builtin_game
from .learning import LearnerSpec, run_self_play
from .mediation import (
    AuctionScenario,
    MediatorPolicy,
    SignalDevice,
    apply_mediator_policy,
    audit_signals,
    builtin_device,
    optimal_bribe,
    outcome_distribution,
    run_auction,
    sample_signals,
    signal_counts,
)

KINDS = ("verify", "learn", "bribe", "penalty", "duel", "auction", "audit")

CSV_COLUMNS = {
    "verify": ("repetition", "player", "kind", "detail", "gain", "occurrence_probability"),
    "learn": (
        "repetition",
        "T",
        "max_avg_external_regret",
        "max_avg_swap_regret",
        "cce_epsilon",
        "ce_epsilon_joint",
        "ce_epsilon_conditional",
        "singular_rounds",
    ),
    "bribe": ("repetition", "player", "signal", "best_payoff", "honest_payoff", "player_gain", "mediator_surplus_bound"),
    "penalty": ("repetition", "penalty", "max_conditional_gain", "obedience"),
    "duel": ("repetition", "row_program", "col_program", "row_payoff", "col_payoff", "outcomes"),
    "auction": ("repetition", "auction", "winner", "price", "honest_price", "extraction"),
    "audit": ("repetition", "signal", "observed", "declared", "g_statistic", "flagged", "deviation_proven"),
}

Number = Union[int, float, str]


class ScenarioError(ValueError):
    """Invalid scenario config; ``fields`` lists (path, message) pairs."""

    def __init__(self, message: str, fields: list[tuple[str, str]] | None = None):
        super().__init__(message)
        self.fields = fields or []


def _resolve_game(spec) -> NormalFormGame:
    if isinstance(spec, str):
        return builtin_game(spec)
    return NormalFormGame.from_dict(spec)


def _resolve_device(spec, game) -> SignalDevice:
    if isinstance(spec, str):
        dev = builtin_device(spec)
        dev.check(game)
        return dev
    return SignalDevice.from_dict(spec, game)


class _Base(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 0
    repetitions: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)
    format: Literal["json", "csv"] = "json"
    output: str | None = None


class _GameMixin(_Base):
    game: Union[str, dict[str, Any]] = "stop_light"

    @field_validator("game")
    @classmethod
    def _check_game(cls, v):
        _resolve_game(v)
        return v

    def resolved_game(self) -> NormalFormGame:
        return _resolve_game(self.game)


class _DeviceMixin(_GameMixin):
    device: Union[str, dict[str, Any]] = "stop_light"

    def resolved_device(self) -> SignalDevice:
        return _resolve_device(self.device, self.resolved_game())


class VerifyConfig(_DeviceMixin):
    kind: Literal["verify"] = "verify"


class LearnerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    algorithm: Literal["regret_matching", "hedge", "swap_regret", "pgd"] = "regret_matching"
    learning_rate: float | None = Field(None, gt=0)
    step_scale: float | None = Field(None, gt=0)
    initial_strategy: list[float] | None = None


class LearnConfig(_GameMixin):
    kind: Literal["learn"] = "learn"
    learners: list[LearnerConfig] = Field(default_factory=lambda: [LearnerConfig()], min_length=1)
    T: int = Field(10_000, ge=1)
    backend: Literal["numba", "numpy"] | None = None
    include_trace: bool = False


class BribeConfig(_DeviceMixin):
    kind: Literal["bribe"] = "bribe"
    colluding_player: int | None = Field(None, ge=0)


class PenaltyConfig(_DeviceMixin):
    kind: Literal["penalty"] = "penalty"
    penalty_grid: list[Number] = Field(default_factory=lambda: [0, "1/2", 1, "3/2"], min_length=1)

    @field_validator("penalty_grid")
    @classmethod
    def _nonneg(cls, v):
        for d in v:
            if to_fraction(d) < 0:
                raise ValueError(f"penalty {d} is negative")
        return v


class DuelConfig(_GameMixin):
    kind: Literal["duel"] = "duel"
    device: Union[str, dict[str, Any], None] = None
    programs: list[Union[str, dict[str, Any]]] | None = None
    depth: int = Field(3, ge=0)


class AuctionConfig(_Base):
    kind: Literal["auction"] = "auction"
    bids: list[Number] | None = Field(None, min_length=2)
    n_auctions: int = Field(1, ge=1)
    n_bidders: int = Field(2, ge=2)
    low: Number = 0
    high: Number = 100
    tick: Number = "1/100"
    auctioneer: Literal["honest", "shill"] = "shill"

    @field_validator("tick")
    @classmethod
    def _tick(cls, v):
        if to_fraction(v) <= 0:
            raise ValueError("tick must be positive")
        return v


class PolicyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["honest", "fixed_signal", "reweighted"] = "honest"
    signal: str | None = None
    weights: list[Number] | None = None
    side_payment: Number = 0

    def build(self) -> MediatorPolicy:
        w = tuple(self.weights) if self.weights is not None else None
        return MediatorPolicy(self.kind, self.signal, w, self.side_payment)


class AuditConfig(_DeviceMixin):
    kind: Literal["audit"] = "audit"
    observed_counts: list[int] | None = None
    policy: PolicyConfig = PolicyConfig()
    n_draws: int = Field(1000, ge=1)
    threshold: float | None = None


ScenarioConfig = Annotated[
    Union[VerifyConfig, LearnConfig, BribeConfig, PenaltyConfig, DuelConfig, AuctionConfig, AuditConfig],
    Field(discriminator="kind"),
]
_adapter = TypeAdapter(ScenarioConfig)


def parse_config(doc: dict, kind: str | None = None):
    """Validate a config document; ``kind`` fills in or must match ``doc["kind"]``."""
    if not isinstance(doc, dict):
        raise ScenarioError("config must be a JSON object", [("", "expected an object")])
    doc = dict(doc)
    if kind is not None:
        if doc.setdefault("kind", kind) != kind:
            raise ScenarioError(
                f"config kind {doc['kind']!r} does not match subcommand {kind!r}", [("kind", "mismatch")]
            )
    try:
        cfg = _adapter.validate_python(doc)
    except ValidationError as e:
        fields = [(".".join(str(p) for p in err["loc"][1:]) or err["loc"][0], err["msg"]) for err in e.errors()]
        raise ScenarioError("invalid scenario config", fields) from None
    _check_references(cfg)
    return cfg


def _check_references(cfg) -> None:
    """Resolve devices and programs now so failures carry a field path."""
    device = getattr(cfg, "device", None)
    if device is not None:
        try:
            _resolve_device(device, cfg.resolved_game())
        except ValueError as e:
            raise ScenarioError("invalid scenario config", [("device", str(e))]) from None
    if isinstance(cfg, LearnConfig):
        game = cfg.resolved_game()
        n = len(cfg.learners)
        if n not in (1, game.n_players):
            raise ScenarioError(
                f"need 1 or {game.n_players} learners, got {n}", [("learners", "wrong number of learners")]
            )
        for k, l in enumerate(cfg.learners):
            x = l.initial_strategy
            if x is None:
                continue
            sizes = {game.n_actions[i] for i in (range(game.n_players) if n == 1 else [k])}
            if len(sizes) != 1 or len(x) not in sizes or min(x) < 0 or abs(sum(x) - 1.0) > 1e-12:
                raise ScenarioError(
                    "invalid scenario config",
                    [(f"learners.{k}.initial_strategy", f"not a distribution over {sorted(sizes)} actions")],
                )
    if isinstance(cfg, DuelConfig) and cfg.programs is not None:
        corpus = CORPORA.get(cfg.resolved_game().name, lambda d: {})(cfg.depth)
        for k, spec in enumerate(cfg.programs):
            try:
                _program(spec, corpus)
            except (ValueError, KeyError, TypeError) as e:
                raise ScenarioError("invalid scenario config", [(f"programs.{k}", str(e))]) from None


def config_hash(config) -> str:
    canon = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def repetition_seed(master: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(rep,))


def _jsonable(x):
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# -- per-kind runners: (config, rep, seed sequence) -> metrics dict ---------


def _run_verify(cfg: VerifyConfig, rep, ss):
    game, dev = cfg.resolved_game(), cfg.resolved_device()
    dist = outcome_distribution(dev)
    reports = unconditional_reports(game, dist) + conditional_reports(game, dev)
    return {
        "cce_epsilon": cce_epsilon(game, dist),
        "ce_epsilon": ce_epsilon(game, dev),
        "ce_epsilon_joint": ce_epsilon(game, dev, weighting="joint"),
        "expected_payoffs": [sum(w * game.payoffs[p][i] for p, w in dist.items()) for i in range(game.n_players)],
        "rows": [r.as_row(game) for r in reports],
    }


def _run_learn(cfg: LearnConfig, rep, ss):
    game = cfg.resolved_game()
    specs = [
        LearnerSpec(l.algorithm, l.learning_rate, l.step_scale, tuple(l.initial_strategy) if l.initial_strategy else None)
        for l in cfg.learners
    ]
    if len(specs) == 1:
        specs = specs * game.n_players
    if len(specs) != game.n_players:
        raise ScenarioError(
            f"need 1 or {game.n_players} learners, got {len(specs)}", [("learners", "wrong number of learners")]
        )
    trace = run_self_play(game, specs, cfg.T, ss, backend=cfg.backend)
    out = trace.summary()
    if cfg.include_trace:
        out["trace_csv"] = trace.to_csv()
    return out


def _run_bribe(cfg: BribeConfig, rep, ss):
    game, dev = cfg.resolved_game(), cfg.resolved_device()
    players = range(game.n_players) if cfg.colluding_player is None else [cfg.colluding_player]
    rows = []
    for i in players:
        if i >= game.n_players:
            raise ScenarioError("colluding player out of range", [("colluding_player", "out of range")])
        b = optimal_bribe(game, dev, i)
        rows.append(
            {
                "player": i,
                "signal": b.signal,
                "best_payoff": b.best_payoff,
                "honest_payoff": b.honest_payoff,
                "player_gain": b.player_gain,
                "mediator_surplus_bound": b.mediator_surplus_bound,
                "mediator_surplus_bound_float": float(b.mediator_surplus_bound),
            }
        )
    return {
        "rows": rows,
        "note": "mediator_surplus_bound is the exact maximum side payment per draw "
        "that leaves the colluder no worse off than obeying; any rounded "
        "figure is only an approximation of it",
    }


def _run_penalty(cfg: PenaltyConfig, rep, ss):
    game, dev = cfg.resolved_game(), cfg.resolved_device()
    rows = []
    for d, gap in penalty_sweep(game, dev, cfg.penalty_grid):
        status = "strict" if gap < 0 else "weak" if gap == 0 else "fails"
        rows.append({"penalty": d, "max_conditional_gain": gap, "obedience": status})
    return {"minimal_stabilizing_penalty": minimal_stabilizing_penalty(game, dev), "rows": rows}


def _program(spec, corpus) -> ProgramStrategy:
    if isinstance(spec, str):
        if spec not in corpus:
            raise ScenarioError(f"unknown program {spec!r}", [("programs", f"known: {sorted(corpus)}")])
        return corpus[spec]
    return ProgramStrategy.from_dict(spec)


def _run_duel(cfg: DuelConfig, rep, ss):
    game = cfg.resolved_game()
    dev = _resolve_device(cfg.device, game) if cfg.device is not None else None
    corpus = CORPORA[game.name](cfg.depth) if game.name in CORPORA else {}
    specs = cfg.programs if cfg.programs is not None else list(corpus)
    if not specs:
        raise ScenarioError("no programs given and no built-in corpus for this game", [("programs", "required")])
    progs = [_program(s, corpus) for s in specs]
    signals = list(zip(dev.signals, dev.probabilities)) if dev is not None else [(None, Fraction(1))]
    rows = []
    for pr in progs:
        for pc in progs:
            pay = [Fraction(0), Fraction(0)]
            outcomes = []
            for s, prob in signals:
                prof = execute_program_pair(pr, pc, game, s, cfg.depth, dev)
                u = game.payoffs[prof]
                pay[0] += prob * u[0]
                pay[1] += prob * u[1]
                outcomes.append(f"{s or '-'}:{'/'.join(game.labels_of(prof))}")
            rows.append(
                {
                    "row_program": pr.name,
                    "col_program": pc.name,
                    "row_payoff": pay[0],
                    "col_payoff": pay[1],
                    "outcomes": " ".join(outcomes),
                }
            )
    return {"depth": cfg.depth, "rows": rows}


def _run_auction(cfg: AuctionConfig, rep, ss):
    if cfg.bids is not None:
        bid_sets = [tuple(cfg.bids)]
    else:
        rng = np.random.default_rng(ss)
        lo, hi = to_fraction(cfg.low), to_fraction(cfg.high)
        cents = rng.integers(int(lo * 100), int(hi * 100) + 1, size=(cfg.n_auctions, cfg.n_bidders))
        bid_sets = [tuple(Fraction(int(c), 100) for c in row) for row in cents]
    rows = []
    for k, bids in enumerate(bid_sets):
        out = run_auction(AuctionScenario(bids, cfg.tick, cfg.auctioneer))
        rows.append(
            {
                "auction": k,
                "bids": list(bids),
                "winner": out.winner,
                "price": out.price,
                "honest_price": out.honest_price,
                "extraction": out.extraction,
            }
        )
    return {"total_extraction": sum((r["extraction"] for r in rows), Fraction(0)), "rows": rows}


def _run_audit(cfg: AuditConfig, rep, ss):
    dev = cfg.resolved_device()
    if cfg.observed_counts is not None:
        counts = tuple(cfg.observed_counts)
    else:
        played = apply_mediator_policy(dev, cfg.policy.build())
        counts = signal_counts(dev, sample_signals(played, np.random.default_rng(ss), cfg.n_draws))
    rep_ = audit_signals(counts, dev.probabilities, cfg.threshold)
    summary = rep_.to_dict(dev.signals)
    rows = [
        {
            "signal": s,
            "observed": c,
            "declared": p,
            "g_statistic": rep_.log_likelihood_ratio,
            "flagged": rep_.flagged,
            "deviation_proven": rep_.deviation_proven,
        }
        for s, c, p in zip(dev.signals, rep_.observed_counts, rep_.declared)
    ]
    return {**summary, "rows": rows}


RUNNERS = {
    "verify": _run_verify,
    "learn": _run_learn,
    "bribe": _run_bribe,
    "penalty": _run_penalty,
    "duel": _run_duel,
    "auction": _run_auction,
    "audit": _run_audit,
}


def _aggregate(reps: list[dict]) -> dict:
    out = {}
    for key, val in reps[0].items():
        if key == "rows" or isinstance(val, bool) or not isinstance(val, (int, float, Fraction, np.floating)):
            continue
        vals = [float(r[key]) for r in reps]
        out[key] = {"mean": statistics.fmean(vals), "min": min(vals), "max": max(vals)}
    return out


def run_scenario(config) -> dict:
    """Run every repetition of ``config`` and assemble the report."""
    if isinstance(config, dict):
        config = parse_config(config)
    runner = RUNNERS[config.kind]
    start = time.perf_counter()
    seeds = [repetition_seed(config.seed, k) for k in range(config.repetitions)]
    if config.workers > 1 and config.repetitions > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            reps = list(pool.map(lambda k: runner(config, k, seeds[k]), range(config.repetitions)))
    else:
        reps = [runner(config, k, seeds[k]) for k in range(config.repetitions)]
    backend = kernels.backend_name(kernels.get_backend(getattr(config, "backend", None)))
    return {
        "kind": config.kind,
        "scenario": config.model_dump(mode="json"),
        "config_hash": config_hash(config),
        "seed_provenance": {
            "master_seed": config.seed,
            "derivation": "numpy SeedSequence(master_seed, spawn_key=(repetition,))",
        },
        "backend": backend,
        "repetitions": [_jsonable({"repetition": k, **r}) for k, r in enumerate(reps)],
        "aggregate": _aggregate(reps),
        "wall_clock_seconds": time.perf_counter() - start,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _csv_cell(v):
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, bool):
        return str(v).lower()
    return v


def report_to_csv(report: dict) -> str:
    kind = report["kind"]
    cols = CSV_COLUMNS[kind]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for rep in report["repetitions"]:
        rows = rep.get("rows") or [rep]
        for row in rows:
            w.writerow({c: _csv_cell(v) for c, v in {"repetition": rep["repetition"], **row}.items()})
    return buf.getvalue()
