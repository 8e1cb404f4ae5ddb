"""
Protocol message types and round results.
"""

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..models.fixed_point_model import RingVector
from ..models.network_model import ShapeError
from ..sim.simnet import HEADER_BYTES, Message, RoundTag, RoutingError, SimNet, Transcript

__all__ = [
    "HEADER_BYTES",
    "AggregationResult",
    "Message",
    "RoundAborted",
    "RoundTag",
    "check_secrets",
]


class RoundAborted(RuntimeError):
    """Raised when an aggregation round ends without every expected contribution."""

    def __init__(self, protocol: str, round_tag: int, missing: Sequence[int]):
        self.protocol = protocol
        self.round_tag = round_tag
        self.missing = sorted(missing)
        super().__init__(f"{protocol} round {round_tag} aborted: no contribution from parties {self.missing}")


@dataclass
class AggregationResult:
    """
    Ring sum computed by one protocol round.

    Attributes:
        sum: Element-wise ring sum of the parties' secrets
        transcript: Messages of this round
        protocol: Protocol name
        extras: Protocol-specific intermediate state kept for analysis
            (Shamir aggregate shares, STSMC running sums)
    """

    sum: RingVector
    transcript: Transcript
    protocol: str
    extras: dict[str, Any] = field(default_factory=dict)


def check_secrets(secrets: Sequence[RingVector], net: SimNet) -> int:
    """
    Validate per-party secrets against the network and return their length.

    Raises:
        ShapeError: If vectors differ in length or no secrets are given
        RoutingError: If the network has a different number of parties
    """
    if len(secrets) == 0:
        raise ShapeError("At least one party secret is required")
    lengths = {int(np.asarray(s).size) for s in secrets}
    if len(lengths) != 1:
        raise ShapeError(f"Secret vectors differ in length: {sorted(lengths)}")
    if net.n_parties != len(secrets):
        raise RoutingError(f"Network has {net.n_parties} parties but {len(secrets)} secrets were given")
    return lengths.pop()
