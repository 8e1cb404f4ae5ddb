"""
Shamir Secret-Sharing Aggregation

Round 1: each party embeds its ring vector into GF(2^61 - 1), hides every
element as the constant term of a random degree-(k-1) polynomial, keeps its
own share and sends the evaluation at x = j + 1 to every other party j.
Each party adds the shares it holds point-wise.

Round 2 starts once the last share has been delivered: k-1 parties send
their aggregate share to the combiner (party 0 by default), which
interpolates the k aggregate shares at x = 0 and maps the field sum back to
the ring.
"""

import logging
from typing import Sequence

import numpy as np

from ..models.field_model import FieldVector, embed_ring, extract_ring, random_field_vector, vec_add, vec_eval_poly, vec_interpolate
from ..models.fixed_point_model import RingVector
from ..sim.simnet import Message, RoundTag, SimNet
from .messages import AggregationResult, RoundAborted, check_secrets

logger = logging.getLogger(__name__)


class BadThreshold(ValueError):
    """Raised when the reconstruction threshold is outside [2, n]."""

    pass  # pylint: disable=unnecessary-pass


def share_point(party: int) -> int:
    """Evaluation point of a party (never zero)."""
    return party + 1


def share_vector(field_secret: FieldVector, k: int, n: int, rng: np.random.Generator) -> list[FieldVector]:
    """
    Split a field vector into n shares with threshold k.

    Returns:
        shares[j] = f(share_point(j)) column-wise, f(0) = field_secret
    """
    coeffs = np.empty((k, field_secret.size), dtype=np.uint64)
    coeffs[0] = field_secret
    if k > 1:
        coeffs[1:] = random_field_vector(rng, (k - 1, field_secret.size))
    return [vec_eval_poly(coeffs, share_point(j)) for j in range(n)]


def reconstruct(shares: dict[int, FieldVector]) -> FieldVector:
    """Interpolate {party: share} at x = 0."""
    parties = sorted(shares)
    return vec_interpolate([share_point(p) for p in parties], [shares[p] for p in parties])


def round2_senders(n: int, k: int, combiner: int = 0) -> list[int]:
    """The k-1 parties that forward their aggregate share to the combiner."""
    return [p for p in range(n) if p != combiner][: k - 1]


def shamir_round(
    secrets: Sequence[RingVector],
    k: int,
    net: SimNet,
    rng: np.random.Generator,
    round_tag: int = 0,
    combiner: int = 0,
) -> AggregationResult:
    """
    Two-round Shamir aggregation.

    Args:
        secrets: Per-party ring vectors; signed values must stay within +/-2^60
        k: Reconstruction threshold, 2 <= k <= n
        net: Simulated network
        rng: Source of polynomial coefficients
        round_tag: Aggregation round
        combiner: Party that reconstructs the sum

    Returns:
        AggregationResult; extras['aggregate_shares'] maps party -> aggregate share

    Raises:
        BadThreshold: If k is outside [2, n]
        FieldOverflowError: If a secret cannot be embedded in the field
        RoundAborted: If a share or aggregate share is missing
    """
    n = len(secrets)
    if not 2 <= k <= n:
        raise BadThreshold(f"Threshold k={k} must satisfy 2 <= k <= n={n}")
    check_secrets(secrets, net)

    shares = [share_vector(embed_ring(s), k, n, rng) for s in secrets]
    aggregate: dict[int, FieldVector] = {j: shares[j][j].copy() for j in range(n)}
    shares_sent = {j: 0 for j in range(n)}
    delivered = {"shares": 0}
    at_combiner: dict[int, FieldVector] = {}
    senders = round2_senders(n, k, combiner)
    tag_shares = RoundTag(round_tag, "shares")
    tag_aggregate = RoundTag(round_tag, "aggregate")

    def on_party(msg: Message):
        me = msg.receiver
        if msg.round_tag.phase == "shares":
            aggregate[me] = vec_add(aggregate[me], msg.payload)
            shares_sent[msg.sender] += 1
            delivered["shares"] += 1
            if delivered["shares"] == n * (n - 1):
                at_combiner[combiner] = aggregate[combiner]
                for s in senders:
                    net.send(s, combiner, tag_aggregate, aggregate[s])
        elif msg.round_tag.phase == "aggregate" and me == combiner:
            at_combiner[msg.sender] = msg.payload

    net.register_all(on_party)
    for i in range(n):
        for j in range(n):
            if i != j:
                net.send(i, j, tag_shares, shares[i][j])
    transcript = net.run_until_idle()

    if len(at_combiner) < k:
        missing = [p for p in range(n) if shares_sent[p] < n - 1]
        if not missing:
            missing = [s for s in senders if s not in at_combiner]
        raise RoundAborted("shamir", round_tag, missing)
    field_sum = reconstruct(at_combiner)
    total = extract_ring(field_sum, n)
    logger.debug("shamir round %d: n=%d k=%d, %d messages", round_tag, n, k, transcript.total_messages)
    return AggregationResult(
        total,
        transcript,
        "shamir",
        extras={"aggregate_shares": aggregate, "field_sum": field_sum, "combiner": combiner},
    )
