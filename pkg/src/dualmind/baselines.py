"""The five comparison policies behind the common decide(observation, rng) interface.

A policy instance is owned by one run and constructed fresh for the next,
so the learning baseline starts every run with an empty table. Policies
that learn from outcomes implement update(action, outcome, next_obs); the
rest leave it out and the harness skips the call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .core import Provenance, ScenarioConfig, ScheduleAction

Q_ALPHA = 0.1
Q_GAMMA = 0.95
Q_EPSILON = 0.2


def _reactive(nodes: Sequence[int]) -> ScheduleAction:
    return ScheduleAction(nodes=frozenset(nodes), provenance=Provenance.FAST_MIND)


def random_select(n_nodes: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """A uniformly random k-subset of nodes."""
    subsets = list(combinations(range(n_nodes), k))
    return subsets[int(rng.integers(len(subsets)))]


def lqf_select(q: Sequence[int], k: int) -> tuple[int, ...]:
    """The k longest queues; ties go to the smaller node id."""
    order = sorted(range(len(q)), key=lambda i: (-q[i], i))
    return tuple(sorted(order[:k]))


def deadline_priority_select(
    q: Sequence[int],
    oldest_age: Sequence[int | None],
    deadlines: Sequence[int | None],
    k: int,
) -> tuple[int, ...]:
    """Queue length scaled up as a node's head packet approaches its deadline.

    Weight is q * (1 + 1 / (slack + 1)) for deadline-bearing nodes with a
    backlog, where slack is the remaining head-of-queue lifetime floored at
    zero; plain queue length otherwise. Without deadlines this reduces to
    longest-queue-first.
    """
    weights: list[float] = []
    for i in range(len(q)):
        limit = deadlines[i]
        if limit is not None and q[i] > 0:
            slack = max(limit - oldest_age[i], 0)
            weights.append(q[i] * (1.0 + 1.0 / (slack + 1)))
        else:
            weights.append(float(q[i]))
    order = sorted(range(len(q)), key=lambda i: (-weights[i], i))
    return tuple(sorted(order[:k]))


@dataclass
class RoundRobinMemory:
    """Most recent service slot per node; -1 marks never served."""

    last_served: list[int]


def fair_rr_select(
    q: Sequence[int], memory: RoundRobinMemory, k: int, t: int
) -> tuple[int, ...]:
    """Least-recently-served backlogged nodes first, padded with idle nodes.

    Ties break by smaller node id. Updates the memory for the chosen nodes.
    """
    last = memory.last_served
    backlogged = sorted((i for i in range(len(q)) if q[i] > 0), key=lambda i: (last[i], i))
    chosen = backlogged[:k]
    if len(chosen) < k:
        idle = sorted((i for i in range(len(q)) if q[i] == 0), key=lambda i: (last[i], i))
        chosen.extend(idle[: k - len(chosen)])
    for i in chosen:
        last[i] = t
    return tuple(sorted(chosen))


def q_state_key(q: Sequence[int]) -> tuple[int, ...]:
    """Coarse queue-occupancy buckets per node: empty, light (1-5), loaded (6-20), heavy."""
    key = []
    for length in q:
        if length == 0:
            key.append(0)
        elif length <= 5:
            key.append(1)
        elif length <= 20:
            key.append(2)
        else:
            key.append(3)
    return tuple(key)


@dataclass
class QTable:
    """State-bucket to action-value table; unseen states read as all zeros.

    Actions are k-subsets indexed by their lexicographic rank.
    """

    n_actions: int
    alpha: float = Q_ALPHA
    gamma: float = Q_GAMMA
    epsilon: float = Q_EPSILON
    entries: dict[tuple[int, ...], list[float]] = field(default_factory=dict)

    def values(self, key: tuple[int, ...]) -> list[float]:
        vals = self.entries.get(key)
        return vals if vals is not None else [0.0] * self.n_actions


def q_select(table: QTable, key: tuple[int, ...], rng: np.random.Generator) -> int:
    """Epsilon-greedy action index; the exploration gate draws first, then ties
    resolve to the smallest index."""
    if rng.random() < table.epsilon:
        return int(rng.integers(table.n_actions))
    vals = table.values(key)
    best = 0
    for idx in range(1, table.n_actions):
        if vals[idx] > vals[best]:
            best = idx
    return best


def q_update(
    table: QTable, key: tuple[int, ...], action: int, reward: float, next_key: tuple[int, ...]
) -> None:
    """One temporal-difference backup toward reward plus discounted best next value."""
    vals = table.entries.setdefault(key, [0.0] * table.n_actions)
    next_best = max(table.values(next_key))
    vals[action] += table.alpha * (reward + table.gamma * next_best - vals[action])


class RandomPolicy:
    name = "random"

    def __init__(self, cfg: ScenarioConfig):
        self._n = cfg.n_nodes
        self._k = cfg.max_scheduled

    def decide(self, obs, rng: np.random.Generator) -> ScheduleAction:
        return _reactive(random_select(self._n, self._k, rng))


class LqfPolicy:
    name = "lqf"

    def __init__(self, cfg: ScenarioConfig):
        self._k = cfg.max_scheduled

    def decide(self, obs, rng) -> ScheduleAction:
        return _reactive(lqf_select(obs.q, self._k))


class DeadlinePriorityPolicy:
    name = "deadline"

    def __init__(self, cfg: ScenarioConfig):
        self._k = cfg.max_scheduled
        self._deadlines = cfg.deadlines

    def decide(self, obs, rng) -> ScheduleAction:
        return _reactive(
            deadline_priority_select(obs.q, obs.oldest_age, self._deadlines, self._k)
        )


class FairRoundRobinPolicy:
    name = "rr"

    def __init__(self, cfg: ScenarioConfig):
        self._k = cfg.max_scheduled
        self.memory = RoundRobinMemory(last_served=[-1] * cfg.n_nodes)

    def decide(self, obs, rng) -> ScheduleAction:
        return _reactive(fair_rr_select(obs.q, self.memory, self._k, obs.t))


class QLearningPolicy:
    """Online tabular learner; it explores during the run it is scored on."""

    name = "qlearn"

    def __init__(self, cfg: ScenarioConfig):
        self._subsets = list(combinations(range(cfg.n_nodes), cfg.max_scheduled))
        self.table = QTable(n_actions=len(self._subsets))
        self._pending: tuple[tuple[int, ...], int] | None = None

    def decide(self, obs, rng: np.random.Generator) -> ScheduleAction:
        key = q_state_key(obs.q)
        idx = q_select(self.table, key, rng)
        self._pending = (key, idx)
        return _reactive(self._subsets[idx])

    def update(self, action, outcome, next_obs) -> None:
        key, idx = self._pending
        q_update(self.table, key, idx, outcome.reward, q_state_key(next_obs.q))
