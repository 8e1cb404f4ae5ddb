"""
Secure aggregation protocols over the simulated network.

All protocols compute the element-wise ring sum of per-party vectors and
return it with the round's transcript.
"""

from .messages import AggregationResult, Message, RoundAborted, RoundTag
from .neighbor_graph import GraphInfeasible, NeighborGraph, build_neighbor_graph
from .masked import masked_payload, masked_round
from .baselines import TooFewParties, nosmc_round, stsmc_round
from .shamir import BadThreshold, reconstruct, shamir_round, share_point, share_vector

PROTOCOL_NAMES = ("nosmc", "stsmc", "shamir", "masked")

__all__ = [
    "PROTOCOL_NAMES",
    "AggregationResult",
    "Message",
    "RoundAborted",
    "RoundTag",
    "GraphInfeasible",
    "NeighborGraph",
    "build_neighbor_graph",
    "masked_payload",
    "masked_round",
    "TooFewParties",
    "nosmc_round",
    "stsmc_round",
    "BadThreshold",
    "reconstruct",
    "shamir_round",
    "share_point",
    "share_vector",
]
