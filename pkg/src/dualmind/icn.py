"""Feasibility filtering for candidate schedules.

A schedule passes when every member has a backlog, no member's head packet
has outlived its deadline, and no two members interfere. The filter is a
pure predicate; enumeration recomputes it each slot, which is cheap at the
node counts this testbed targets.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .core import ConflictGraph


def icn_check(
    schedule: Iterable[int],
    q: Sequence[int],
    oldest_age: Sequence[int | None],
    deadlines: Sequence[int | None],
    conflicts: ConflictGraph,
) -> bool:
    """True iff the schedule is feasible in the observed state."""
    members = tuple(schedule)
    for i in members:
        if q[i] == 0:
            return False
        limit = deadlines[i]
        age = oldest_age[i]
        if limit is not None and age is not None and age > limit:
            return False
    for i, j in combinations(members, 2):
        if conflicts.contains(i, j):
            return False
    return True


def enumerate_feasible(
    n_nodes: int,
    k: int,
    q: Sequence[int],
    oldest_age: Sequence[int | None],
    deadlines: Sequence[int | None],
    conflicts: ConflictGraph,
) -> list[tuple[int, ...]]:
    """All feasible schedules of exactly k nodes, in lexicographic order.

    An empty result means no full-size schedule is feasible and the caller
    falls back to the reactive rule.
    """
    return [
        candidate
        for candidate in combinations(range(n_nodes), k)
        if icn_check(candidate, q, oldest_age, deadlines, conflicts)
    ]
