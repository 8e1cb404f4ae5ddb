"""
Baseline Aggregation Protocols

NOSMC: every party uploads its raw secret to the mediator.

STSMC: two passes around the ring P0 -> P1 -> ... -> P(n-1) -> P0. In the
first pass each party adds its secret and a private random mask to the
running value; in the second pass each party removes its mask. P0 ends up
holding the sum.
"""

import logging
from typing import Sequence

import numpy as np

from ..models.fixed_point_model import RingVector, as_ring, random_ring_vector, ring_add, ring_sub, ring_sum
from ..sim.simnet import Message, RoundTag, SimNet
from .messages import AggregationResult, RoundAborted, check_secrets

logger = logging.getLogger(__name__)


class TooFewParties(ValueError):
    """Raised when a ring protocol is run with fewer than two parties."""

    pass  # pylint: disable=unnecessary-pass


def nosmc_round(secrets: Sequence[RingVector], net: SimNet, round_tag: int = 0) -> AggregationResult:
    """
    Direct upload: the mediator sees every secret and adds them.

    Raises:
        ShapeError: On length mismatch
        RoundAborted: If an upload is missing
    """
    check_secrets(secrets, net)
    received: dict[int, RingVector] = {}

    def on_mediator(msg: Message):
        received[msg.sender] = msg.payload

    net.register_all(None)
    net.register(net.mediator, on_mediator)
    tag = RoundTag(round_tag, "upload")
    for party, secret in enumerate(secrets):
        net.send(party, net.mediator, tag, as_ring(secret))
    transcript = net.run_until_idle()

    missing = [p for p in range(len(secrets)) if p not in received]
    if missing:
        raise RoundAborted("nosmc", round_tag, missing)
    return AggregationResult(ring_sum([received[p] for p in range(len(secrets))]), transcript, "nosmc")


def stsmc_round(
    secrets: Sequence[RingVector],
    rng: np.random.Generator,
    net: SimNet,
    round_tag: int = 0,
    deliver_to_mediator: bool = False,
) -> AggregationResult:
    """
    Two-pass ring aggregation.

    Pass 1 sends A_i = A_(i-1) + s_i + r_i forward, with A_(-1) = 0. Pass 2
    starts at P0 with B_0 = A_(n-1) - r_0 and sends B_i = B_(i-1) - r_i
    forward; B_(n-1) arrives at P0 and equals the sum.

    Args:
        secrets: Per-party ring vectors
        rng: Source of the parties' private masks
        net: Simulated network
        round_tag: Aggregation round
        deliver_to_mediator: Forward the final sum P0 -> mediator as an extra message

    Returns:
        AggregationResult; extras hold the pass values ('pass1', 'pass2') and masks

    Raises:
        TooFewParties: If fewer than two parties take part
        RoundAborted: If the ring breaks before P0 holds the sum
    """
    n = len(secrets)
    if n < 2:
        raise TooFewParties(f"STSMC needs at least 2 parties, got {n}")
    length = check_secrets(secrets, net)
    masks = [random_ring_vector(rng, length) for _ in range(n)]
    pass1: dict[int, RingVector] = {}
    pass2: dict[int, RingVector] = {}
    result: dict[str, RingVector] = {}
    tag1 = RoundTag(round_tag, "pass1")
    tag2 = RoundTag(round_tag, "pass2")

    def on_party(msg: Message):
        me = msg.receiver
        nxt = (me + 1) % n
        if msg.round_tag.phase == "pass1":
            if me == 0:
                pass2[0] = ring_sub(msg.payload, masks[0])
                net.send(0, 1, tag2, pass2[0])
            else:
                pass1[me] = ring_add(ring_add(msg.payload, as_ring(secrets[me])), masks[me])
                net.send(me, nxt, tag1, pass1[me])
        elif msg.round_tag.phase == "pass2":
            if me == 0:
                result["sum"] = msg.payload
                if deliver_to_mediator:
                    net.send(0, net.mediator, RoundTag(round_tag, "result"), msg.payload)
            else:
                pass2[me] = ring_sub(msg.payload, masks[me])
                net.send(me, nxt, tag2, pass2[me])

    def on_mediator(msg: Message):
        result["delivered"] = msg.payload

    net.register_all(on_party)
    net.register(net.mediator, on_mediator)
    pass1[0] = ring_add(as_ring(secrets[0]), masks[0])
    net.send(0, 1, tag1, pass1[0])
    transcript = net.run_until_idle()

    if "sum" not in result or (deliver_to_mediator and "delivered" not in result):
        missing = [p for p in range(n) if net.is_failed(p) or transcript.sent(p) < 2]
        raise RoundAborted("stsmc", round_tag, missing)
    return AggregationResult(
        result["sum"],
        transcript,
        "stsmc",
        extras={"pass1": pass1, "pass2": pass2, "masks": masks},
    )

