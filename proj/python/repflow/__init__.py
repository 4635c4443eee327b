"""Flow replication for fat-tree data center networks."""

from ._repflow import (
    mean_queueing_delay,
    model,
    presets,
    scenario,
    short_flow_byte_fraction,
    simulate,
    simulate_mg1,
    simulate_replicated_pair,
    slow_start_rounds,
    sweep,
    tail_queueing_delay,
)

__all__ = [
    "mean_queueing_delay",
    "model",
    "presets",
    "scenario",
    "short_flow_byte_fraction",
    "simulate",
    "simulate_mg1",
    "simulate_replicated_pair",
    "slow_start_rounds",
    "sweep",
    "tail_queueing_delay",
]
