"""Slotted wireless access scheduling testbed.

A deterministic digital twin of a small slotted network, a dual-mind
scheduler (short-horizon rollout planning over a feasibility-filtered
candidate set, with a reactive urgency fallback), five baseline policies,
and a campaign harness that aggregates metrics over seeded runs.
"""

from .baselines import (
    DeadlinePriorityPolicy,
    FairRoundRobinPolicy,
    LqfPolicy,
    QLearningPolicy,
    QTable,
    RandomPolicy,
    RoundRobinMemory,
)
from .core import (
    BUILTIN_SCENARIOS,
    ConflictGraph,
    InvalidConfig,
    NodeState,
    Packet,
    Provenance,
    RolloutReward,
    ScenarioConfig,
    ScheduleAction,
    UnknownScenario,
    builtin_scenario,
    scenario_from_dict,
    scenario_to_dict,
    validate_config,
)
from .dmwm import (
    DecisionRecord,
    DmwmScheduler,
    RolloutResult,
    dmwm_decide,
    fast_mind_select,
    rollout,
    slow_mind_select,
)
from .harness import (
    POLICY_NAMES,
    PolicyAggregate,
    RunRecord,
    aggregate,
    make_policy,
    run_episode,
    run_experiment,
)
from .icn import enumerate_feasible, icn_check
from .traffic import (
    TrafficStreams,
    arrival_rate,
    generate_arrivals,
    make_rng,
    policy_stream,
    sample_poisson,
    traffic_streams,
)
from .twin import (
    Observation,
    RunMetrics,
    SimulationEnded,
    StepOutcome,
    TwinState,
    conservation_gap,
    imagined_next,
    metrics,
    observe,
    record_model_error,
    reset,
    step,
)

__version__ = "0.1.0"
