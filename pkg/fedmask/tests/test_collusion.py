"""
Unit tests for collusion attacks.

Coalitions at or above a protocol's minimum recover the victim's secret
exactly; smaller coalitions are left with a uniform residual.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.analysis.collusion import (
    Attempt,
    CollusionScenario,
    byte_entropy,
    collude,
    low_byte_chi_square,
    random_secrets,
    run_collusion_trials,
    shamir_undetermined,
    stsmc_recover,
    summarize,
)
from fedmask.models.field_model import random_field_vector
from fedmask.models.fixed_point_model import ring_sum
from fedmask.models.keyexchange_model import DhGroup
from fedmask.protocols.baselines import stsmc_round
from fedmask.protocols.masked import masked_round
from fedmask.protocols.neighbor_graph import build_neighbor_graph
from fedmask.protocols.shamir import share_vector
from fedmask.sim.simnet import LatencyMatrix, SimNet

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

TOY = DhGroup.named("toy23")


def attack(protocol, colluders, victim=0, mediator=False, n=5, k=2, trials=3, dim=8, seed=0):
    scenario = CollusionScenario(protocol, frozenset(colluders), victim, mediator, trials)
    return run_collusion_trials(scenario, n, k, dim=dim, seed=seed, group=TOY)


class TestScenario:
    """Test cases for CollusionScenario."""

    def test_victim_cannot_collude(self):
        """Test a victim inside the coalition is rejected."""
        with pytest.raises(ValueError):
            CollusionScenario("masked", frozenset({0, 1}), 0)

    def test_trials_positive(self):
        """Test at least one trial is required."""
        with pytest.raises(ValueError):
            CollusionScenario("masked", frozenset(), 0, trials=0)

    def test_describe(self):
        """Test the human-readable coalition."""
        assert CollusionScenario("masked", frozenset({4, 1}), 0, True).describe() == "masked: {P1, P4, M} vs P0"
        assert CollusionScenario("nosmc", frozenset(), 2).describe() == "nosmc: {nobody} vs P2"

    def test_ids_below_n(self):
        """Test party ids outside the federation are rejected."""
        with pytest.raises(ValueError):
            attack("nosmc", {7}, mediator=True)


class TestMaskedAttack:
    """Test cases for attacks on the masked protocol."""

    def test_all_neighbors_and_mediator_recover(self):
        """Test the mediator with every neighbor of the victim recovers it."""
        report = attack("masked", {1, 4}, mediator=True)
        assert report.exact_recovery
        assert report.recovered_trials == report.trials == 3
        assert report.residual_entropy == 0.0
        assert report.verdict == "RECOVERED"

    def test_missing_one_neighbor(self):
        """Test k-1 neighbors with the mediator learn nothing."""
        report = attack("masked", {1}, mediator=True, trials=20, dim=64, seed=3)
        assert not report.exact_recovery
        assert report.recovered_trials == 0
        assert report.residual_entropy > 40.0
        assert report.residual_uniform

    def test_neighbors_without_mediator(self):
        """Test parties alone never see the victim's upload."""
        report = attack("masked", {1, 2, 3, 4}, mediator=False)
        assert not report.observed
        assert report.residual_entropy == 64.0
        assert np.isnan(report.chi_square_p)
        assert report.to_dict()["chi_square_p"] is None
        assert report.verdict == "NOT RECOVERED, no view"

    def test_collude_needs_graph(self):
        """Test a masked round cannot be attacked without its graph."""
        n = 3
        graph = build_neighbor_graph(n, 2, 0, TOY)
        secrets = random_secrets(n, 2, np.random.default_rng(0))
        result = masked_round(secrets, graph, 0, SimNet(LatencyMatrix.uniform(n, 1.0)))
        scenario = CollusionScenario("masked", frozenset({1, 2}), 0, True)
        with pytest.raises(ValueError):
            collude(scenario, result, secrets)
        assert collude(scenario, result, secrets, graph).exact


class TestBaselineAttacks:
    """Test cases for NOSMC and STSMC attacks."""

    def test_nosmc_mediator_alone(self):
        """Test the mediator alone reads every NOSMC secret."""
        assert attack("nosmc", set(), victim=2, mediator=True).exact_recovery
        assert not attack("nosmc", {0, 1}, victim=2).observed

    @pytest.mark.parametrize("victim", [0, 2, 4])
    def test_stsmc_ring_neighbors_recover(self, victim):
        """Test predecessor and successor together recover the victim."""
        n = 5
        report = attack("stsmc", {(victim - 1) % n, (victim + 1) % n}, victim=victim)
        assert report.exact_recovery

    def test_stsmc_single_neighbor(self):
        """Test one ring neighbor alone does not recover the victim."""
        report = attack("stsmc", {3}, victim=2, trials=5)
        assert not report.exact_recovery

    def test_stsmc_recover_formula(self):
        """Test the running-sum identity on a real round."""
        rng = np.random.default_rng(6)
        secrets = random_secrets(4, 3, rng)
        result = stsmc_round(secrets, rng, SimNet(LatencyMatrix.uniform(4, 1.0)))
        for victim in range(4):
            recovered = stsmc_recover(victim, 4, result.extras["pass1"], result.extras["pass2"])
            assert np.array_equal(recovered, secrets[victim])


class TestShamirAttack:
    """Test cases for attacks on Shamir sharing."""

    def test_k_colluders_recover(self):
        """Test k share holders interpolate the victim's secret."""
        assert attack("shamir", {1, 2, 3}, k=3).exact_recovery

    def test_k_minus_one_colluders(self):
        """Test k-1 share holders get a uniform field residual."""
        report = attack("shamir", {1, 2}, k=3, trials=20, dim=64, seed=4)
        assert not report.exact_recovery
        assert report.observed

    def test_undetermined(self):
        """Test every completion of k-1 shares is a consistent, distinct secret."""
        rng = np.random.default_rng(7)
        shares = share_vector(random_field_vector(rng, 3), 3, 5, rng)
        report = shamir_undetermined({1: shares[1], 4: shares[4]}, 3, candidates=50, rng=rng)
        assert report.undetermined
        assert report.consistent == 50

    def test_undetermined_share_count(self):
        """Test exactly k-1 shares are required."""
        with pytest.raises(ValueError):
            shamir_undetermined({0: np.zeros(2, dtype=np.uint64)}, 3)


class TestStatistics:
    """Test cases for residual statistics."""

    def test_entropy_of_constant(self):
        """Test a constant residual has zero entropy."""
        assert byte_entropy(np.full(100, 7, dtype=np.uint64)) == 0.0
        assert byte_entropy(np.zeros(0, dtype=np.uint64)) == 0.0

    def test_entropy_of_uniform(self):
        """Test uniform words approach 64 bits."""
        words = np.random.default_rng(0).integers(0, 1 << 63, size=20000, dtype=np.uint64)
        assert byte_entropy(words * np.uint64(2) + np.uint64(1)) > 60.0

    def test_chi_square(self):
        """Test a skewed low byte fails uniformity."""
        assert low_byte_chi_square(np.zeros(1000, dtype=np.uint64)) < 1e-6

    def test_summarize_exact(self):
        """Test all-exact attempts summarize to a recovery."""
        scenario = CollusionScenario("nosmc", frozenset(), 0, True, trials=2)
        zeros = np.zeros(4, dtype=np.uint64)
        report = summarize(scenario, [Attempt(True, True, zeros), Attempt(True, True, zeros)])
        assert report.exact_recovery and report.recovered_trials == 2

    def test_random_secrets_bounded(self):
        """Test secrets stay within 40 signed bits."""
        secrets = random_secrets(3, 50, np.random.default_rng(0))
        signed = np.concatenate(secrets).view(np.int64)
        assert np.all(np.abs(signed) <= 1 << 40)
        assert ring_sum(secrets).dtype == np.uint64


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
