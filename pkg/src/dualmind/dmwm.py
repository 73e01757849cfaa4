"""The dual-mind scheduler.

The slow mind drains a copy of the observed queues over a short horizon for
every feasible schedule and keeps the best-scoring one. The fast mind is a
queue-times-urgency fallback for slots where no feasible schedule exists.
Every decision is logged so a run's planning behaviour can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import ConflictGraph, Provenance, RolloutReward, ScenarioConfig, ScheduleAction
from .icn import enumerate_feasible
from .twin import Observation


@dataclass(frozen=True)
class RolloutResult:
    """One imagined trajectory: the schedule, its score, every intermediate state."""

    schedule: tuple[int, ...]
    reward: int
    trajectory: tuple[tuple[int, ...], ...]


def rollout(
    q: Sequence[int], schedule: Sequence[int], horizon: int, mode: RolloutReward
) -> RolloutResult:
    """Apply the same schedule for `horizon` imagined steps with no arrivals.

    The reward accumulates on the state before each drain step: LITERAL
    counts all backlogged nodes, SERVED counts only scheduled nodes that
    still hold a packet.
    """
    members = tuple(schedule)
    current = list(q)
    trajectory = [tuple(current)]
    reward = 0
    for _ in range(horizon):
        if mode is RolloutReward.LITERAL:
            reward += sum(1 for length in current if length > 0)
        else:
            reward += sum(1 for i in members if current[i] > 0)
        for i in members:
            if current[i] > 0:
                current[i] -= 1
        trajectory.append(tuple(current))
    return RolloutResult(schedule=members, reward=reward, trajectory=tuple(trajectory))


def slow_mind_select(
    feasible: Sequence[Sequence[int]],
    q: Sequence[int],
    horizon: int,
    mode: RolloutReward,
) -> RolloutResult | None:
    """Best rollout over the feasible schedules; None when there are none.

    Only a strict improvement replaces the incumbent, so ties keep the
    earliest schedule in enumeration order.
    """
    best: RolloutResult | None = None
    for candidate in feasible:
        result = rollout(q, candidate, horizon, mode)
        if best is None or result.reward > best.reward:
            best = result
    return best


def fast_mind_select(
    q: Sequence[int],
    deadlines: Sequence[int | None],
    k: int,
    conflicts: ConflictGraph,
    conflict_aware: bool = False,
) -> tuple[int, ...]:
    """Top-k nodes by queue-length urgency, doubled for deadline-bearing nodes.

    The plain variant ranks by urgency alone, breaks ties by smaller node
    id, and always returns k nodes even if some are idle. The conflict-aware
    variant greedily skips nodes that clash with an earlier pick or have
    zero urgency and may return fewer than k.
    """
    urgency = [q[i] * (2 if deadlines[i] is not None else 1) for i in range(len(q))]
    order = sorted(range(len(q)), key=lambda i: (-urgency[i], i))
    if not conflict_aware:
        return tuple(sorted(order[:k]))
    chosen: list[int] = []
    for i in order:
        if len(chosen) == k:
            break
        if urgency[i] == 0:
            continue
        if any(conflicts.contains(i, j) for j in chosen):
            continue
        chosen.append(i)
    return tuple(sorted(chosen))


@dataclass(frozen=True)
class DecisionRecord:
    """Audit row for one scheduling decision."""

    slot: int
    provenance: Provenance
    nodes: tuple[int, ...]
    feasible_count: int
    best_reward: int | None


def dmwm_decide(obs: Observation, cfg: ScenarioConfig) -> tuple[ScheduleAction, DecisionRecord]:
    """One slot's decision: slow mind whenever any feasible schedule exists, else fast mind."""
    feasible = enumerate_feasible(
        cfg.n_nodes, cfg.max_scheduled, obs.q, obs.oldest_age, cfg.deadlines, cfg.conflict_graph
    )
    if feasible:
        best = slow_mind_select(feasible, obs.q, cfg.horizon, cfg.rollout_reward_mode)
        action = ScheduleAction(nodes=frozenset(best.schedule), provenance=Provenance.SLOW_MIND)
        record = DecisionRecord(
            slot=obs.t,
            provenance=Provenance.SLOW_MIND,
            nodes=best.schedule,
            feasible_count=len(feasible),
            best_reward=best.reward,
        )
    else:
        picked = fast_mind_select(
            obs.q, cfg.deadlines, cfg.max_scheduled, cfg.conflict_graph,
            conflict_aware=cfg.fallback_conflict_aware,
        )
        action = ScheduleAction(nodes=frozenset(picked), provenance=Provenance.FAST_MIND)
        record = DecisionRecord(
            slot=obs.t,
            provenance=Provenance.FAST_MIND,
            nodes=picked,
            feasible_count=0,
            best_reward=None,
        )
    return action, record


class DmwmScheduler:
    """Policy wrapper around dmwm_decide keeping a per-run decision trace."""

    name = "dmwm"

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.trace: list[DecisionRecord] = []

    def decide(self, obs: Observation, rng) -> ScheduleAction:
        action, record = dmwm_decide(obs, self.cfg)
        self.trace.append(record)
        return action
