"""
Pairwise-Masked Aggregation

Each party adds, for every neighbor, a seed-derived mask with sign +1 if its
id is the smaller of the pair and -1 otherwise, then uploads once to the
mediator. Summing all uploads cancels every mask exactly in the ring.
"""

import logging
from typing import Sequence

from ..models.fixed_point_model import RingVector, as_ring, ring_add, ring_sub, ring_sum
from ..models.keyexchange_model import mask_stream
from ..models.network_model import ShapeError
from ..sim.simnet import Message, RoundTag, SimNet
from .messages import AggregationResult, RoundAborted, check_secrets
from .neighbor_graph import NeighborGraph

logger = logging.getLogger(__name__)


def masked_payload(party: int, secret: RingVector, graph: NeighborGraph, round_tag: int) -> RingVector:
    """
    Masked upload of one party for one round.

    secret + sum over neighbors i of sign(party, i) * mask_stream(seed, round, len),
    using the seeds this party derived itself.
    """
    payload = as_ring(secret).copy()
    for neighbor, seed in sorted(graph.local_seeds.get(party, {}).items()):
        mask = mask_stream(seed, round_tag, payload.size)
        payload = ring_add(payload, mask) if party < neighbor else ring_sub(payload, mask)
    return payload


def masked_round(
    secrets: Sequence[RingVector],
    graph: NeighborGraph,
    round_tag: int,
    net: SimNet,
) -> AggregationResult:
    """
    One masked aggregation round.

    Args:
        secrets: Per-party ring vectors, index = party id
        graph: Neighbor graph with seeds (graph.n must equal the party count)
        round_tag: Aggregation round; selects the mask streams
        net: Simulated network whose last node is the mediator

    Returns:
        AggregationResult whose sum equals the plain ring sum of the secrets

    Raises:
        ShapeError: On length or party-count mismatch
        RoundAborted: If an upload is missing
    """
    check_secrets(secrets, net)
    if graph.n != len(secrets):
        raise ShapeError(f"Graph covers {graph.n} parties but {len(secrets)} secrets were given")

    received: dict[int, RingVector] = {}

    def on_mediator(msg: Message):
        received[msg.sender] = msg.payload

    net.register_all(None)
    net.register(net.mediator, on_mediator)
    tag = RoundTag(round_tag, "upload")
    for party, secret in enumerate(secrets):
        net.send(party, net.mediator, tag, masked_payload(party, secret, graph, round_tag))
    transcript = net.run_until_idle()

    missing = [p for p in range(len(secrets)) if p not in received]
    if missing:
        raise RoundAborted("masked", round_tag, missing)
    total = ring_sum([received[p] for p in range(len(secrets))])
    logger.debug("masked round %d: %d uploads, latency %.3f ms", round_tag, len(received), transcript.critical_path_latency)
    return AggregationResult(total, transcript, "masked")
