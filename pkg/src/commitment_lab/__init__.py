"""Simulation library for commitment devices in finite games."""

from .commitment import (
    PenaltyDevice,
    PerceptionMap,
    ProgramStrategy,
    Rule,
    execute_program_pair,
    matching_pennies_exploit_value,
    minimal_stabilizing_penalty,
    penalized_conditional_gain,
    perception_attack_payoffs,
)
from .equilibrium import (
    DeviationReport,
    brute_force_best_response,
    cce_epsilon,
    ce_epsilon,
    conditional_deviation_gain,
    unconditional_deviation_gain,
)
from .game import (
    JointDistribution,
    NormalFormGame,
    build_congestion,
    build_matching_pennies,
    build_stop_light,
    expected_payoff,
    payoff,
)
from .learning import (
    LearnerSpec,
    LearnerState,
    LearnerTrace,
    external_regret,
    hedge_step,
    pgd_step,
    project_to_simplex,
    regret_matching_step,
    run_self_play,
    swap_regret,
    swap_regret_step,
)
from .mediation import (
    AuctionScenario,
    AuditReport,
    MediatorPolicy,
    SignalDevice,
    apply_mediator_policy,
    audit_signals,
    build_stop_light_device,
    optimal_bribe,
    outcome_distribution,
    run_auction,
    sample_signal,
)
from .runner import parse_config, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AuctionScenario",
    "AuditReport",
    "DeviationReport",
    "JointDistribution",
    "LearnerSpec",
    "LearnerState",
    "LearnerTrace",
    "MediatorPolicy",
    "NormalFormGame",
    "PenaltyDevice",
    "PerceptionMap",
    "ProgramStrategy",
    "Rule",
    "SignalDevice",
    "apply_mediator_policy",
    "audit_signals",
    "brute_force_best_response",
    "build_congestion",
    "build_matching_pennies",
    "build_stop_light",
    "build_stop_light_device",
    "cce_epsilon",
    "ce_epsilon",
    "conditional_deviation_gain",
    "execute_program_pair",
    "expected_payoff",
    "external_regret",
    "hedge_step",
    "matching_pennies_exploit_value",
    "minimal_stabilizing_penalty",
    "optimal_bribe",
    "outcome_distribution",
    "parse_config",
    "payoff",
    "penalized_conditional_gain",
    "perception_attack_payoffs",
    "pgd_step",
    "project_to_simplex",
    "regret_matching_step",
    "run_auction",
    "run_scenario",
    "run_self_play",
    "sample_signal",
    "swap_regret",
    "swap_regret_step",
    "unconditional_deviation_gain",
]
