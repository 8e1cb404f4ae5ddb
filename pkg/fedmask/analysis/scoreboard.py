"""
Conformance scoreboard for communication complexity and latency.

Runs one aggregation round per protocol and party count on the simulated
network and checks the transcript against the expected per-role message
counts and the closed-form critical-path latency.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..models.keyexchange_model import DhGroup
from ..protocols.baselines import nosmc_round, stsmc_round
from ..protocols.masked import masked_round
from ..protocols.messages import AggregationResult
from ..protocols.neighbor_graph import build_neighbor_graph
from ..protocols.shamir import round2_senders, shamir_round
from ..sim.latency_report import closed_form_latency
from ..sim.simnet import LatencyMatrix, SimNet, Transcript
from .collusion import random_secrets

logger = logging.getLogger(__name__)

BENCH_PROTOCOLS = ("nosmc", "stsmc", "shamir", "masked")


def expected_total_events(protocol: str, n: int, k: int) -> int:
    """Send plus receive events of one round over all nodes."""
    if protocol in ("nosmc", "masked"):
        return 2 * n
    if protocol == "stsmc":
        return 4 * n
    if protocol == "shamir":
        return 2 * (n * n - n + k - 1)
    raise ValueError(f"Unknown protocol '{protocol}'")


def expected_shamir_roles(n: int, k: int, combiner: int = 0) -> tuple[list[int], list[int]]:
    """
    Per-party (sends, receives) of a Shamir round.

    Every party exchanges n-1 shares; the k-1 round-2 senders send one more
    message and the combiner receives those k-1, so it ends with n+k-2.
    """
    senders = set(round2_senders(n, k, combiner))
    sends = [n - 1 + (1 if p in senders else 0) for p in range(n)]
    receives = [n - 1 + (k - 1 if p == combiner else 0) for p in range(n)]
    return sends, receives


def min_colluders(protocol: str, k: int) -> str:
    """Smallest coalition that recovers a victim's secret."""
    return {"nosmc": "1 (M)", "stsmc": "2", "shamir": str(k), "masked": f"{k} + M"}[protocol]


@dataclass
class ConformanceRow:
    """One protocol x party-count cell of the conformance table."""

    protocol: str
    n: int
    k: int
    holder_sends: list[int]
    holder_receives: list[int]
    mediator_receives: int
    total_events: int
    expected_events: int
    measured_latency: float
    closed_form_latency: float
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "k": self.k,
            "holder_sends": self.holder_sends,
            "holder_receives": self.holder_receives,
            "mediator_receives": self.mediator_receives,
            "total_events": self.total_events,
            "expected_events": self.expected_events,
            "latency_ms": self.measured_latency,
            "closed_form_ms": self.closed_form_latency,
            "min_colluders": min_colluders(self.protocol, self.k),
            "passed": self.passed,
            "errors": self.errors,
        }


class ConformanceScoreboard:
    """
    Scoreboard for protocol rounds.

    Each checked round is a match when every count and the latency agree
    with the analytic expectation, a mismatch otherwise.
    """

    def __init__(self, log: Optional[logging.Logger] = None, tolerance: float = 1e-9):
        """
        Initialize scoreboard.

        Args:
            log: Logger (module logger by default)
            tolerance: Allowed latency divergence in ms
        """
        self.log = log if log else logger
        self.tolerance = tolerance
        self.matches = 0
        self.mismatches = 0
        self.errors: list[str] = []
        self.rows: list[ConformanceRow] = []

    def _count_errors(self, row: ConformanceRow) -> list[str]:
        errors = []
        n = row.n
        if row.protocol in ("nosmc", "masked"):
            if row.holder_sends != [1] * n:
                errors.append(f"holder sends {row.holder_sends}, expected 1 each")
            if row.mediator_receives != n:
                errors.append(f"mediator received {row.mediator_receives}, expected {n}")
        elif row.protocol == "stsmc":
            if row.holder_sends != [2] * n or row.holder_receives != [2] * n:
                errors.append(f"sends {row.holder_sends} / receives {row.holder_receives}, expected 2/2 each")
        elif row.protocol == "shamir":
            sends, receives = expected_shamir_roles(n, row.k)
            if row.holder_sends != sends:
                errors.append(f"holder sends {row.holder_sends}, expected {sends}")
            if row.holder_receives != receives:
                errors.append(f"holder receives {row.holder_receives}, expected {receives}")
            if row.mediator_receives != 0:
                errors.append(f"mediator received {row.mediator_receives}, expected 0")
        if row.total_events != row.expected_events:
            errors.append(f"{row.total_events} send/receive events, expected {row.expected_events}")
        divergence = abs(row.measured_latency - row.closed_form_latency)
        if divergence > self.tolerance:
            errors.append(
                f"latency {row.measured_latency:.9f} ms vs closed form {row.closed_form_latency:.9f} ms"
            )
        return errors

    def check_round(
        self,
        protocol: str,
        transcript: Transcript,
        latency: LatencyMatrix,
        k: int,
        processing_delay: float = 0.0,
    ) -> bool:
        """
        Check one round's transcript.

        Args:
            protocol: Protocol that produced the transcript
            transcript: Messages of exactly one aggregation round
            latency: Matrix the round ran on
            k: Neighbor count (masked) or threshold (shamir)
            processing_delay: Per-hop delay the network applied

        Returns:
            True if every count and the latency match
        """
        n = latency.n_parties
        row = ConformanceRow(
            protocol=protocol,
            n=n,
            k=k,
            holder_sends=[transcript.sent(p) for p in range(n)],
            holder_receives=[transcript.received(p) for p in range(n)],
            mediator_receives=transcript.received(latency.mediator),
            total_events=transcript.total_events,
            expected_events=expected_total_events(protocol, n, k),
            measured_latency=transcript.critical_path_latency,
            closed_form_latency=closed_form_latency(protocol, latency, k, processing_delay),
        )
        row.errors = self._count_errors(row)
        self.rows.append(row)

        if row.errors:
            for error in row.errors:
                message = f"{protocol} n={n} k={k}: {error}"
                self.log.error(message)
                self.errors.append(message)
            self.mismatches += 1
            return False

        self.matches += 1
        self.log.debug("%s n=%d k=%d matched", protocol, n, k)
        return True

    def report(self) -> bool:
        """Log the final scoreboard report and return the pass flag."""
        total = self.matches + self.mismatches

        self.log.info("=" * 60)
        self.log.info("CONFORMANCE SCOREBOARD")
        self.log.info("=" * 60)
        self.log.info("Rounds checked: %d", total)
        self.log.info("Matches: %d", self.matches)
        self.log.info("Mismatches: %d", self.mismatches)

        if self.mismatches > 0:
            self.log.error("FAILED: %d mismatches", self.mismatches)
            self.log.error("First 10 errors:")
            for i, error in enumerate(self.errors[:10]):
                self.log.error("  %d. %s", i + 1, error)
        else:
            self.log.info("PASSED: all rounds match")

        self.log.info("=" * 60)

        return self.mismatches == 0


def protocol_k(protocol: str, n: int, k: int) -> int:
    """Clamp k to what the protocol accepts for n parties."""
    if protocol == "masked":
        k = min(k, n - 1)
        return k - 1 if (n * k) % 2 else k
    if protocol == "shamir":
        return max(2, min(k, n))
    return k


def run_protocol_round(
    protocol: str,
    secrets: Sequence,
    net: SimNet,
    k: int,
    rng: np.random.Generator,
    seed: int = 0,
    group: Optional[DhGroup] = None,
) -> AggregationResult:
    """One round of `protocol` with a freshly built neighbor graph for masked."""
    if protocol == "masked":
        graph = build_neighbor_graph(len(secrets), k, random.Random(seed), group)
        return masked_round(secrets, graph, 0, net)
    if protocol == "nosmc":
        return nosmc_round(secrets, net)
    if protocol == "stsmc":
        return stsmc_round(secrets, rng, net)
    if protocol == "shamir":
        return shamir_round(secrets, k, net, rng)
    raise ValueError(f"Unknown protocol '{protocol}'")


def benchmark_protocols(
    n_values: Sequence[int] = (3, 5, 10),
    k: int = 2,
    dim: int = 16,
    latency_for: Optional[Callable[[int], LatencyMatrix]] = None,
    seed: int = 0,
    protocols: Sequence[str] = BENCH_PROTOCOLS,
    processing_delay: float = 0.0,
    scoreboard: Optional[ConformanceScoreboard] = None,
    group: Optional[DhGroup] = None,
) -> ConformanceScoreboard:
    """
    One round per protocol per party count, checked on a scoreboard.

    Args:
        n_values: Party counts
        k: Neighbor count / threshold (clamped per protocol and n)
        dim: Secret vector length
        latency_for: n -> latency matrix (seeded random 1..100 ms by default)
        seed: Seed for secrets, masks and default matrices
        protocols: Protocols to run
        processing_delay: Per-hop processing delay
        scoreboard: Scoreboard to fill (a new one by default)
        group: DH group for the masked protocol's key agreement

    Returns:
        The scoreboard, one row per protocol x n
    """
    board = scoreboard if scoreboard is not None else ConformanceScoreboard()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 29]))
    for n in n_values:
        latency = latency_for(n) if latency_for is not None else LatencyMatrix.random(n, rng)
        secrets = random_secrets(n, dim, rng)
        for protocol in protocols:
            pk = protocol_k(protocol, n, k)
            net = SimNet(latency, processing_delay)
            result = run_protocol_round(protocol, secrets, net, pk, rng, seed, group)
            board.check_round(protocol, result.transcript, latency, pk, processing_delay)
    return board
