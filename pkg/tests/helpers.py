"""Shared test helpers."""

from dualmind.core import ConflictGraph, RolloutReward, ScenarioConfig


def make_cfg(
    n_nodes=5,
    max_scheduled=3,
    buffer=50,
    steps=200,
    horizon=3,
    lam=1.0,
    lambda_base=None,
    deadlines=None,
    pairs=(),
    burst_nodes=(),
    burst_probability=0.05,
    burst_amplitude_range=(2.0, 5.0),
    rollout_reward_mode=RolloutReward.SERVED,
    fallback_conflict_aware=False,
    base_seed=42,
):
    """Hand-rolled config; deliberately not validated so edge cases can be exercised."""
    if lambda_base is None:
        lambda_base = (float(lam),) * n_nodes
    if deadlines is None:
        deadlines = (None,) * n_nodes
    return ScenarioConfig(
        n_nodes=n_nodes,
        max_scheduled=max_scheduled,
        buffer=buffer,
        steps=steps,
        horizon=horizon,
        lambda_base=tuple(lambda_base),
        deadlines=tuple(deadlines),
        conflict_graph=ConflictGraph.from_pairs(pairs),
        burst_nodes=frozenset(burst_nodes),
        burst_probability=burst_probability,
        burst_amplitude_range=tuple(burst_amplitude_range),
        rollout_reward_mode=rollout_reward_mode,
        fallback_conflict_aware=fallback_conflict_aware,
        base_seed=base_seed,
    )
