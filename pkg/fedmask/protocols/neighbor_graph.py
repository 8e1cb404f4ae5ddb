"""
Mask-Sharing Neighbor Graph

Every party agrees a shared seed with exactly k neighbors via Diffie-Hellman.
The neighbor relation is a k-regular undirected graph: circulant by default,
seeded-random on request.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Optional, Union

import networkx as nx
import numpy as np

from ..models.keyexchange_model import DhGroup, SharedSeed, dh_keypair, dh_shared
from ..sim.simnet import RoundTag, SimNet, Transcript

logger = logging.getLogger(__name__)

STRATEGIES = ("circulant", "random")


class GraphInfeasible(ValueError):
    """Raised when no k-regular graph on n nodes exists."""

    pass  # pylint: disable=unnecessary-pass


@dataclass
class NeighborGraph:
    """
    Symmetric k-regular mask-sharing graph.

    Attributes:
        n: Party count
        k: Neighbors per party
        adjacency: Unordered pairs (i, j) with i < j
        seeds: Seed per pair as derived by the pair's smaller id
        local_seeds: Seeds as each party derived them, local_seeds[j][i]
        setup_transcript: Public-value exchange, when recorded on a network
    """

    n: int
    k: int
    adjacency: frozenset[tuple[int, int]]
    seeds: dict[tuple[int, int], SharedSeed] = field(default_factory=dict)
    local_seeds: dict[int, dict[int, SharedSeed]] = field(default_factory=dict)
    setup_transcript: Optional[Transcript] = None

    def neighbors(self, party: int) -> list[int]:
        """Sorted neighbor ids S_party."""
        return sorted(j if i == party else i for i, j in self.adjacency if party in (i, j))

    def seed(self, a: int, b: int) -> SharedSeed:
        return self.seeds[(min(a, b), max(a, b))]

    def degree_sequence(self) -> list[int]:
        return [len(self.neighbors(j)) for j in range(self.n)]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.adjacency)
        return g


def circulant_offsets(n: int, k: int) -> list[int]:
    """Offsets 1..k/2, plus n/2 when k is odd (n is then even)."""
    offsets = list(range(1, k // 2 + 1))
    if k % 2 == 1:
        offsets.append(n // 2)
    return offsets


def _regular_graph(n: int, k: int, strategy: str, seed: int) -> nx.Graph:
    if strategy == "circulant":
        return nx.circulant_graph(n, circulant_offsets(n, k))
    if strategy == "random":
        return nx.random_regular_graph(k, n, seed=seed)
    raise ValueError(f"Unknown graph strategy '{strategy}', expected one of {STRATEGIES}")


def _public_payload(value: int, group: DhGroup) -> np.ndarray:
    raw = value.to_bytes(group.byte_length, "big")
    raw = raw.rjust(-(-len(raw) // 8) * 8, b"\x00")
    return np.frombuffer(raw, dtype=">u8").astype(np.uint64)


def build_neighbor_graph(
    n: int,
    k: int,
    rng: Union[random.Random, int, None] = None,
    group: Optional[DhGroup] = None,
    strategy: str = "circulant",
    net: Optional[SimNet] = None,
) -> NeighborGraph:
    """
    Build the k-regular neighbor graph and run pairwise key agreement.

    Each party draws one DH keypair; for every edge both endpoints derive the
    shared seed from the other's public value.

    Args:
        n: Party count (>= 1)
        k: Neighbors per party, 0 <= k <= n - 1 with n * k even
        rng: Seeded random source (or an int seed) for DH exponents and random graphs
        group: DH group (default: 2048-bit MODP group)
        strategy: 'circulant' or 'random'
        net: When given, the public-value exchange is recorded there as
            'setup' messages, two per edge

    Returns:
        NeighborGraph with per-edge seeds

    Raises:
        GraphInfeasible: If k is out of range or n * k is odd

    Examples:
        >>> sorted(build_neighbor_graph(3, 2, 0, DhGroup.named("toy23")).adjacency)
        [(0, 1), (0, 2), (1, 2)]
    """
    if n < 1 or k < 0 or k > n - 1:
        raise GraphInfeasible(f"Need 0 <= k <= n - 1, got n={n}, k={k}")
    if (n * k) % 2 == 1:
        raise GraphInfeasible(f"No {k}-regular graph on {n} nodes (n * k is odd)")
    if not isinstance(rng, random.Random):
        rng = random.Random(0 if rng is None else rng)
    group = group if group is not None else DhGroup()

    g = _regular_graph(n, k, strategy, rng.randrange(1 << 31))
    adjacency = frozenset((min(i, j), max(i, j)) for i, j in g.edges())

    keys = [dh_keypair(group, rng) for _ in range(n)]
    graph = NeighborGraph(n, k, adjacency, local_seeds={j: {} for j in range(n)})
    for i, j in sorted(adjacency):
        seed_i = dh_shared(keys[i][0], keys[j][1], group, pair=(i, j))
        seed_j = dh_shared(keys[j][0], keys[i][1], group, pair=(i, j))
        graph.local_seeds[i][j] = seed_i
        graph.local_seeds[j][i] = seed_j
        graph.seeds[(i, j)] = seed_i

    if net is not None:
        net.register_all(None)
        for i, j in sorted(adjacency):
            net.send(i, j, RoundTag(0, "setup"), _public_payload(keys[i][1], group))
            net.send(j, i, RoundTag(0, "setup"), _public_payload(keys[j][1], group))
        graph.setup_transcript = net.run_until_idle()

    logger.info("Built %s neighbor graph n=%d k=%d with %d seeded edges", strategy, n, k, len(adjacency))
    return graph
