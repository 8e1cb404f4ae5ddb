"""
Unit tests for the aggregation protocols.

Every protocol must return the plain ring sum of the party secrets; the
tests also cover per-protocol message structure and failure handling.
"""

import random
import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.analysis.collusion import random_secrets
from fedmask.models.field_model import FieldOverflowError, embed_ring, random_field_vector
from fedmask.models.fixed_point_model import as_ring, random_ring_vector, ring_sum
from fedmask.models.keyexchange_model import DhGroup
from fedmask.models.network_model import ShapeError
from fedmask.protocols import PROTOCOL_NAMES
from fedmask.protocols.baselines import TooFewParties, nosmc_round, stsmc_round
from fedmask.protocols.masked import masked_payload, masked_round
from fedmask.protocols.messages import RoundAborted
from fedmask.protocols.neighbor_graph import GraphInfeasible, build_neighbor_graph, circulant_offsets
from fedmask.protocols.shamir import BadThreshold, reconstruct, round2_senders, shamir_round, share_vector
from fedmask.sim.simnet import LatencyMatrix, RoutingError, SimNet

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

TOY = DhGroup.named("toy23")


def net_for(n: int, ms: float = 3.0) -> SimNet:
    return SimNet(LatencyMatrix.uniform(n, ms))


def mask_cases():
    cases = []
    for n in (2, 3, 5, 10):
        for k in sorted({min(2, n - 1), n - 1}):
            cases.append((n, k))
    return cases


class TestNeighborGraph:
    """Test cases for the mask-sharing neighbor graph."""

    def test_docstring_example(self):
        """Test the complete graph on three parties."""
        assert sorted(build_neighbor_graph(3, 2, 0, TOY).adjacency) == [(0, 1), (0, 2), (1, 2)]

    @pytest.mark.parametrize("n,k", [(5, 2), (6, 3), (10, 4), (4, 0)])
    def test_regular(self, n, k):
        """Test every party has exactly k neighbors."""
        graph = build_neighbor_graph(n, k, 1, TOY)
        assert graph.degree_sequence() == [k] * n
        assert len(graph.adjacency) == n * k // 2

    def test_circulant_offsets(self):
        """Test offsets with an odd degree add the antipode."""
        assert circulant_offsets(10, 4) == [1, 2]
        assert circulant_offsets(6, 3) == [1, 3]

    @pytest.mark.parametrize("n,k", [(5, 3), (3, 3), (4, -1), (0, 0)])
    def test_infeasible(self, n, k):
        """Test impossible degrees raise GraphInfeasible."""
        with pytest.raises(GraphInfeasible):
            build_neighbor_graph(n, k, 0, TOY)

    def test_seeds_agree(self, fast_group):
        """Test both endpoints of every edge derived the same seed."""
        graph = build_neighbor_graph(5, 2, 3, fast_group)
        for i, j in graph.adjacency:
            assert graph.local_seeds[i][j] == graph.local_seeds[j][i] == graph.seed(j, i)

    def test_random_strategy(self):
        """Test seeded random graphs are k-regular and reproducible."""
        a = build_neighbor_graph(10, 3, 4, TOY, strategy="random")
        b = build_neighbor_graph(10, 3, 4, TOY, strategy="random")
        assert a.adjacency == b.adjacency
        assert a.degree_sequence() == [3] * 10

    def test_unknown_strategy(self):
        """Test unknown strategies are rejected."""
        with pytest.raises(ValueError):
            build_neighbor_graph(4, 2, 0, TOY, strategy="ring")

    def test_setup_transcript(self):
        """Test key exchange records two setup messages per edge."""
        net = net_for(5)
        graph = build_neighbor_graph(5, 2, 0, TOY, net=net)
        assert graph.setup_transcript is not None
        assert graph.setup_transcript.total_messages == 2 * len(graph.adjacency)
        assert graph.setup_transcript.phases() == {"setup"}

    def test_networkx_view(self):
        """Test the graph converts to networkx with every party as a node."""
        g = build_neighbor_graph(6, 2, 0, TOY).to_networkx()
        assert sorted(g.nodes) == list(range(6))
        assert g.number_of_edges() == 6


class TestMasked:
    """Test cases for the pairwise-masked protocol."""

    @pytest.mark.parametrize("n,k", mask_cases())
    def test_masks_cancel(self, n, k, fast_group):
        """Test the masked sum is bit-identical to the ring sum."""
        rng = np.random.default_rng([n, k])
        graph = build_neighbor_graph(n, k, n, fast_group)
        net = net_for(n)
        for tag in range(10):
            secrets = [random_ring_vector(rng, 1000) for _ in range(n)]
            result = masked_round(secrets, graph, tag, net)
            assert np.array_equal(result.sum, ring_sum(secrets))

    def test_payload_hides_secret(self):
        """Test uploads differ from secrets whenever a party has neighbors."""
        graph = build_neighbor_graph(4, 2, 0, TOY)
        secret = as_ring(np.arange(16))
        assert not np.array_equal(masked_payload(1, secret, graph, 0), secret)

    def test_no_neighbors_is_plain_upload(self):
        """Test k = 0 uploads the secret itself."""
        graph = build_neighbor_graph(3, 0, 0, TOY)
        secret = as_ring(np.arange(5))
        assert np.array_equal(masked_payload(2, secret, graph, 7), secret)

    def test_masks_change_per_round(self):
        """Test the same secret is masked differently in different rounds."""
        graph = build_neighbor_graph(3, 2, 0, TOY)
        secret = as_ring(np.arange(8))
        assert not np.array_equal(masked_payload(0, secret, graph, 0), masked_payload(0, secret, graph, 1))

    def test_message_structure(self):
        """Test one upload per party and nothing else."""
        n = 5
        graph = build_neighbor_graph(n, 2, 0, TOY)
        result = masked_round(random_secrets(n, 4, np.random.default_rng(0)), graph, 0, net_for(n))
        transcript = result.transcript
        assert transcript.total_messages == n
        assert all(m.receiver == n for m in transcript.messages)
        assert result.protocol == "masked"

    def test_missing_upload_aborts(self):
        """Test a failed party aborts the round naming it."""
        n = 4
        graph = build_neighbor_graph(n, 2, 0, TOY)
        net = net_for(n)
        net.fail(1)
        with pytest.raises(RoundAborted) as exc:
            masked_round(random_secrets(n, 4, np.random.default_rng(0)), graph, 0, net)
        assert exc.value.missing == [1]
        assert exc.value.protocol == "masked"

    def test_graph_size_mismatch(self):
        """Test a graph for a different party count is rejected."""
        graph = build_neighbor_graph(4, 2, 0, TOY)
        with pytest.raises(ShapeError):
            masked_round(random_secrets(3, 4, np.random.default_rng(0)), graph, 0, net_for(3))

    def test_secret_length_mismatch(self):
        """Test secrets of different lengths are rejected."""
        graph = build_neighbor_graph(2, 1, 0, TOY)
        with pytest.raises(ShapeError):
            masked_round([as_ring([1, 2]), as_ring([1])], graph, 0, net_for(2))

    def test_network_size_mismatch(self):
        """Test a network with a different party count is rejected."""
        graph = build_neighbor_graph(3, 2, 0, TOY)
        with pytest.raises(RoutingError):
            masked_round(random_secrets(3, 2, np.random.default_rng(0)), graph, 0, net_for(4))


class TestBaselines:
    """Test cases for NOSMC and STSMC."""

    def test_nosmc_sum(self):
        """Test direct upload sums correctly with one message per party."""
        secrets = random_secrets(4, 6, np.random.default_rng(1))
        result = nosmc_round(secrets, net_for(4))
        assert np.array_equal(result.sum, ring_sum(secrets))
        assert result.transcript.total_messages == 4

    def test_nosmc_abort(self):
        """Test a missing NOSMC upload aborts."""
        net = net_for(3)
        net.fail(2)
        with pytest.raises(RoundAborted):
            nosmc_round(random_secrets(3, 2, np.random.default_rng(0)), net)

    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_stsmc_sum(self, n):
        """Test the two-pass ring sum and its message counts."""
        rng = np.random.default_rng(n)
        secrets = random_secrets(n, 5, rng)
        result = stsmc_round(secrets, rng, net_for(n))
        assert np.array_equal(result.sum, ring_sum(secrets))
        assert result.transcript.total_messages == 2 * n
        assert all(result.transcript.sent(p) == 2 for p in range(n))
        assert set(result.extras) == {"pass1", "pass2", "masks"}

    def test_stsmc_pass_values(self):
        """Test A_i carries the masked running sum and B_(n-1) is the sum."""
        rng = np.random.default_rng(4)
        secrets = random_secrets(3, 2, rng)
        result = stsmc_round(secrets, rng, net_for(3))
        pass1, pass2, masks = result.extras["pass1"], result.extras["pass2"], result.extras["masks"]
        assert np.array_equal(pass1[1], ring_sum([secrets[0], masks[0], secrets[1], masks[1]]))
        assert np.array_equal(pass2[2], result.sum)

    def test_stsmc_to_mediator(self):
        """Test the optional delivery adds one message to the mediator."""
        rng = np.random.default_rng(5)
        result = stsmc_round(random_secrets(3, 2, rng), rng, net_for(3), deliver_to_mediator=True)
        assert result.transcript.total_messages == 7
        assert result.transcript.received(3) == 1

    def test_stsmc_too_few_parties(self):
        """Test a single party cannot run the ring protocol."""
        with pytest.raises(TooFewParties):
            stsmc_round([as_ring([1])], np.random.default_rng(0), net_for(1))

    def test_stsmc_broken_ring(self):
        """Test a failed party breaks the ring and aborts the round."""
        net = net_for(4)
        net.fail(2)
        with pytest.raises(RoundAborted) as exc:
            stsmc_round(random_secrets(4, 2, np.random.default_rng(0)), np.random.default_rng(1), net)
        assert 2 in exc.value.missing


class TestShamir:
    """Test cases for Shamir secret-sharing aggregation."""

    @pytest.mark.parametrize("n,k", [(2, 2), (4, 3), (5, 2), (5, 5)])
    def test_sum(self, n, k):
        """Test the reconstructed sum equals the ring sum."""
        rng = np.random.default_rng([n, k])
        secrets = random_secrets(n, 6, rng)
        result = shamir_round(secrets, k, net_for(n), rng)
        assert np.array_equal(result.sum, ring_sum(secrets))

    def test_message_counts(self):
        """Test n(n-1) shares plus k-1 aggregate shares (28 events at n=4, k=3)."""
        rng = np.random.default_rng(0)
        result = shamir_round(random_secrets(4, 3, rng), 3, net_for(4), rng)
        transcript = result.transcript
        assert len(transcript.filter("shares")) == 12
        assert len(transcript.filter("aggregate")) == 2
        assert transcript.total_events == 28

    def test_other_combiner(self):
        """Test a non-default combiner reconstructs the same sum."""
        rng = np.random.default_rng(1)
        secrets = random_secrets(4, 3, rng)
        result = shamir_round(secrets, 3, net_for(4), rng, combiner=2)
        assert np.array_equal(result.sum, ring_sum(secrets))
        assert {m.receiver for m in result.transcript.filter("aggregate")} == {2}

    def test_round2_senders(self):
        """Test the first k-1 non-combiners forward their aggregate share."""
        assert round2_senders(5, 3) == [1, 2]
        assert round2_senders(5, 3, combiner=1) == [0, 2]

    @pytest.mark.parametrize("k", [1, 5])
    def test_bad_threshold(self, k):
        """Test thresholds outside [2, n] are rejected."""
        with pytest.raises(BadThreshold):
            shamir_round(random_secrets(4, 2, np.random.default_rng(0)), k, net_for(4), np.random.default_rng(0))

    def test_overflow(self):
        """Test secrets beyond +/-2^60 cannot be shared."""
        secrets = [as_ring(np.array([1 << 61], dtype=np.int64)), as_ring([0])]
        with pytest.raises(FieldOverflowError):
            shamir_round(secrets, 2, net_for(2), np.random.default_rng(0))

    def test_missing_share_aborts(self):
        """Test a failed party aborts the round."""
        net = net_for(4)
        net.fail(3)
        with pytest.raises(RoundAborted) as exc:
            shamir_round(random_secrets(4, 2, np.random.default_rng(0)), 3, net, np.random.default_rng(0))
        assert 3 in exc.value.missing

    def test_any_k_shares_reconstruct(self):
        """Test every k-subset of shares interpolates the same secret."""
        rng = np.random.default_rng(9)
        secret = random_field_vector(rng, 4)
        shares = share_vector(secret, 3, 5, rng)
        for subset in ([0, 1, 2], [1, 3, 4], [0, 2, 4]):
            assert np.array_equal(reconstruct({p: shares[p] for p in subset}), secret)

    def test_embedding_of_secret(self):
        """Test shares carry the offset embedding of the ring secret."""
        rng = np.random.default_rng(10)
        secret = as_ring([-5, 0, 7])
        shares = share_vector(embed_ring(secret), 2, 3, rng)
        assert np.array_equal(reconstruct({0: shares[0], 2: shares[2]}), embed_ring(secret))


class TestEquivalence:
    """Test cases for cross-protocol agreement."""

    def test_all_protocols_agree(self):
        """Test all four protocols return identical sums on identical inputs."""
        n = 5
        rng = np.random.default_rng(77)
        graph = build_neighbor_graph(n, 2, random.Random(0), TOY)
        for trial in range(10):
            secrets = random_secrets(n, 8, rng)
            sums = {
                "nosmc": nosmc_round(secrets, net_for(n), trial).sum,
                "stsmc": stsmc_round(secrets, rng, net_for(n), trial).sum,
                "shamir": shamir_round(secrets, 3, net_for(n), rng, trial).sum,
                "masked": masked_round(secrets, graph, trial, net_for(n)).sum,
            }
            assert set(sums) == set(PROTOCOL_NAMES)
            for value in sums.values():
                assert np.array_equal(value, ring_sum(secrets))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
