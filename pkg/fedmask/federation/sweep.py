"""
Experiment Sweeps

Rounds-to-threshold over the local-update count E, and head-only training
quality for every base/head split of a network.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from ..data.partition import PartyData
from ..models.network_model import NetworkSpec, ParamVector
from ..sim.simnet import SimNet
from .edge_phase import run_edge_phase
from .runtime import FedConfig, RoundRecord

logger = logging.getLogger(__name__)

NOT_REACHED = "NR"


def rounds_to_threshold(history: Sequence[RoundRecord], threshold: float) -> Optional[int]:
    """
    First round whose validation loss is <= threshold.

    Returns:
        Round number, or None when the budget ran out first
    """
    for record in history:
        if record.val_loss <= threshold:
            return int(record.round)  # type: ignore[call-overload]
    return None


@dataclass
class SweepRow:
    """Rounds-to-threshold of one E value across seeds (None = not reached)."""

    local_updates: int
    rounds: list[Optional[int]] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)

    @property
    def median_rounds(self) -> float:
        """Median with unreached runs counted as infinitely many rounds."""
        values = [float("inf") if r is None else float(r) for r in self.rounds]
        return float(np.median(values)) if values else float("inf")

    def median_label(self) -> str:
        median = self.median_rounds
        if np.isinf(median):
            return NOT_REACHED
        return str(int(median)) if median == int(median) else f"{median:.1f}"

    def csv_row(self) -> list:
        return [self.local_updates, self.median_label(), " ".join(str(s) for s in self.seeds)]


SWEEP_COLUMNS = ("E", "median_rounds", "seeds")

RunFn = Callable[[int, int], Sequence[RoundRecord]]


def local_updates_sweep(
    run: RunFn,
    e_values: Sequence[int],
    threshold: float,
    seeds: Sequence[int],
) -> list[SweepRow]:
    """
    Measure rounds-to-threshold for each local-update count.

    Args:
        run: Callable (E, seed) -> per-round history of one training run
        e_values: Local-update counts to try
        threshold: Validation-loss target
        seeds: Seeds per E value

    Returns:
        One SweepRow per E, in the given order
    """
    rows = []
    for e in e_values:
        row = SweepRow(e, seeds=list(seeds))
        for seed in seeds:
            row.rounds.append(rounds_to_threshold(run(e, seed), threshold))
        logger.info("E=%d: rounds %s, median %s", e, row.rounds, row.median_label())
        rows.append(row)
    return rows


def edge_sweep_runner(
    parties_for_seed: Callable[[int], Sequence[PartyData]],
    spec: NetworkSpec,
    params_for_seed: Callable[[int], ParamVector],
    config: FedConfig,
    net_for_seed: Callable[[int], SimNet],
) -> RunFn:
    """Build a RunFn that runs the edge phase with config.local_updates = E."""

    def run(e: int, seed: int) -> Sequence[RoundRecord]:
        cfg = replace(config, local_updates=e)
        result = run_edge_phase(parties_for_seed(seed), spec, params_for_seed(seed), cfg, net_for_seed(seed), seed=seed)
        return result.history

    return run


@dataclass
class PartitionPoint:
    """Head-only training outcome for one base/head split."""

    head_start_layer: int
    head_param_count: int
    head_fraction: float
    val_accuracy: float


def partition_sweep(
    spec: NetworkSpec,
    parties: Sequence[PartyData],
    params: ParamVector,
    config: FedConfig,
    net: SimNet,
    seed: int = 0,
) -> list[PartitionPoint]:
    """
    Run head-only edge training for every split with a nonempty head.

    Returns:
        One PartitionPoint per head_start_layer in 0..n_layers-1
    """
    points = []
    for head_start in range(spec.n_layers):
        split = spec.with_head_start(head_start)
        start = ParamVector(params.values.copy(), split.head_offset)
        result = run_edge_phase(parties, split, start, config, net, seed=seed)
        point = PartitionPoint(head_start, split.head_param_count, split.head_fraction, result.history[-1].val_accuracy)
        logger.info(
            "split at layer %d: %d head params (%.2f%%), val acc %.3f",
            head_start,
            point.head_param_count,
            100 * point.head_fraction,
            point.val_accuracy,
        )
        points.append(point)
    return points
