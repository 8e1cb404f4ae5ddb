"""
Latency Report

Closed-form round latencies per protocol, checked against the measured
critical path of a simulated round.
"""

import logging
from dataclasses import dataclass

from .simnet import LatencyMatrix, Transcript

logger = logging.getLogger(__name__)

DIVERGENCE_TOLERANCE_MS = 1e-9

PROTOCOLS = ("nosmc", "stsmc", "shamir", "masked")


def closed_form_latency(
    protocol: str,
    latency: LatencyMatrix,
    k: int = 2,
    processing_delay: float = 0.0,
    stsmc_deliver_to_mediator: bool = False,
    combiner: int = 0,
) -> float:
    """
    Analytic completion time of one aggregation round.

    - nosmc / masked: max_i L(P_i, M)
    - stsmc: 2 * (sum of ring links P_i -> P_i+1, including P_n-1 -> P_0),
      plus L(P_0, M) when the result is delivered to the mediator
    - shamir: max pairwise L(P_i, P_j) + max over the k-1 senders of L(P_s, combiner)

    Every hop also pays `processing_delay`.
    """
    n = latency.n_parties
    d = processing_delay
    mediator = latency.mediator
    if protocol in ("nosmc", "masked"):
        return max(latency(i, mediator) + d for i in range(n))
    if protocol == "stsmc":
        ring = sum(latency(i, (i + 1) % n) + d for i in range(n))
        total = 2.0 * ring
        if stsmc_deliver_to_mediator:
            total += latency(0, mediator) + d
        return total
    if protocol == "shamir":
        pairwise = max(latency(i, j) + d for i in range(n) for j in range(n) if i != j)
        senders = [s for s in range(n) if s != combiner][: k - 1]
        to_combiner = max((latency(s, combiner) + d for s in senders), default=0.0)
        return pairwise + to_combiner
    raise ValueError(f"Unknown protocol '{protocol}', expected one of {PROTOCOLS}")


@dataclass
class LatencyReport:
    """Measured vs. analytic latency of one round."""

    protocol: str
    measured: float
    closed_form: float

    @property
    def divergence(self) -> float:
        return abs(self.measured - self.closed_form)

    @property
    def ok(self) -> bool:
        return self.divergence <= DIVERGENCE_TOLERANCE_MS

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "measured_ms": self.measured,
            "closed_form_ms": self.closed_form,
            "divergence_ms": self.divergence,
            "ok": self.ok,
        }


def latency_report(
    transcript: Transcript,
    protocol: str,
    latency: LatencyMatrix,
    k: int = 2,
    processing_delay: float = 0.0,
    stsmc_deliver_to_mediator: bool = False,
) -> LatencyReport:
    """
    Compare a round's critical path with the protocol's closed form.

    Divergence above 1e-9 ms is logged as a warning and reflected in `ok`.
    """
    report = LatencyReport(
        protocol,
        transcript.critical_path_latency,
        closed_form_latency(protocol, latency, k, processing_delay, stsmc_deliver_to_mediator),
    )
    if not report.ok:
        logger.warning(
            "%s latency diverges: measured %.6f ms vs closed form %.6f ms",
            protocol,
            report.measured,
            report.closed_form,
        )
    return report
