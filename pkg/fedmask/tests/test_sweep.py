"""
Unit tests for the local-update and base/head partition sweeps.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.federation.runtime import RoundRecord
from fedmask.federation.sweep import (
    NOT_REACHED,
    SweepRow,
    edge_sweep_runner,
    local_updates_sweep,
    partition_sweep,
    rounds_to_threshold,
)
from fedmask.models.network_model import init_params
from fedmask.tests.conftest import small_config, uniform_net

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def history(val_losses):
    return [
        RoundRecord(r, 0.0, 0.5, 0.5, 0.5, 0.5, 0, 0, 0.0, val_loss=v) for r, v in enumerate(val_losses, start=1)
    ]


class TestRoundsToThreshold:
    """Test cases for rounds_to_threshold."""

    def test_first_round_at_or_below(self):
        """Test the first round meeting the target is returned."""
        assert rounds_to_threshold(history([0.5, 0.3, 0.2, 0.1]), 0.2) == 3

    def test_not_reached(self):
        """Test None when the budget runs out."""
        assert rounds_to_threshold(history([0.5, 0.4]), 0.1) is None


class TestSweepRow:
    """Test cases for SweepRow medians."""

    def test_median_counts_unreached_as_infinite(self):
        """Test unreached runs push the median up."""
        assert SweepRow(1, [3, None, 5]).median_label() == "5"
        assert SweepRow(1, [None, None, 4]).median_label() == NOT_REACHED

    def test_fractional_median(self):
        """Test an even number of seeds can give a half round."""
        assert SweepRow(2, [2, 3]).median_label() == "2.5"

    def test_csv_row(self):
        """Test CSV rows carry E, the median and the seeds."""
        assert SweepRow(4, [7], seeds=[1, 2]).csv_row() == [4, "7", "1 2"]


class TestLocalUpdatesSweep:
    """Test cases for local_updates_sweep."""

    def test_larger_e_reaches_sooner(self):
        """Test rows follow the runner's per-E histories."""

        def run(e, seed):
            return history([1.0 / (1 + e * r) for r in range(1, 11)])

        rows = local_updates_sweep(run, [1, 2, 5], threshold=0.1, seeds=[0, 1, 2])
        assert [row.local_updates for row in rows] == [1, 2, 5]
        assert [row.median_rounds for row in rows] == [9.0, 5.0, 2.0]

    def test_edge_runner(self, small_spec, small_parties):
        """Test the edge runner trains with the requested E."""
        run = edge_sweep_runner(
            lambda seed: small_parties,
            small_spec,
            lambda seed: init_params(small_spec, np.random.default_rng(seed)),
            small_config(rounds=2, protocol="nosmc"),
            lambda seed: uniform_net(3),
        )
        rows = local_updates_sweep(run, [1, 3], threshold=float("inf"), seeds=[0])
        assert [row.csv_row() for row in rows] == [[1, "1", "0"], [3, "1", "0"]]


class TestPartitionSweep:
    """Test cases for partition_sweep."""

    def test_every_split(self, small_spec, small_parties):
        """Test one point per split with shrinking heads."""
        params = init_params(small_spec, np.random.default_rng(0))
        points = partition_sweep(small_spec, small_parties, params, small_config(rounds=1, protocol="nosmc"), uniform_net(3))
        assert [p.head_start_layer for p in points] == [0, 1, 2]
        assert points[0].head_param_count == small_spec.total_param_count
        assert points[0].head_fraction == 1.0
        assert points[-1].head_param_count == 4 * 2 + 2
        counts = [p.head_param_count for p in points]
        assert counts == sorted(counts, reverse=True)
        assert all(0.0 <= p.val_accuracy <= 1.0 for p in points)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
