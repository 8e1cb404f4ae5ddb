"""
Discrete-Event Network Simulator

Single-threaded message scheduler over a per-link latency matrix. Messages
are delivered in (deliver_time, sequence) order to handlers registered per
node; every delivery is recorded in a Transcript with per-node counters.

Node ids 0..n-1 are parties; the last node of the latency matrix is the
mediator.
"""

import json
import heapq
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# Fixed per-message header charged on top of 8 bytes per payload word.
HEADER_BYTES = 32

Payload = npt.NDArray[np.uint64]
Handler = Callable[["Message"], None]


class RoutingError(LookupError):
    """Raised when a message is addressed to a node the network does not know."""

    pass  # pylint: disable=unnecessary-pass


@dataclass(frozen=True)
class RoundTag:
    """Aggregation round number and protocol phase ('pass1', 'shares', 'setup', ...)."""

    round: int
    phase: str

    def as_list(self) -> list:
        return [self.round, self.phase]


@dataclass
class Message:
    """
    One protocol message.

    Payloads are 64-bit words: ring elements, field elements, or raw bytes
    packed into words for setup and broadcast traffic.
    """

    sender: int
    receiver: int
    round_tag: RoundTag
    payload: Payload
    send_time: float = 0.0
    deliver_time: float = 0.0
    seq: int = 0

    def __post_init__(self):
        self.payload = np.asarray(self.payload, dtype=np.uint64)

    @property
    def byte_size(self) -> int:
        return 8 * int(self.payload.size) + HEADER_BYTES

    def to_record(self) -> dict:
        """JSON-lines record of the message (payload omitted)."""
        return {
            "round_tag": self.round_tag.as_list(),
            "sender": self.sender,
            "receiver": self.receiver,
            "byte_size": self.byte_size,
            "send_time": self.send_time,
            "deliver_time": self.deliver_time,
        }


@dataclass
class NodeCounters:
    """Per-node traffic counters."""

    sent: int = 0
    received: int = 0
    bytes_out: int = 0
    bytes_in: int = 0


@dataclass
class Transcript:
    """
    Ordered record of delivered messages.

    Attributes:
        messages: Messages in delivery order
        counters: Per-node sent/received message and byte counts
        critical_path_latency: Completion time of the round in ms
        mediator: Mediator node id
        dropped: Messages discarded because their sender had failed
    """

    mediator: int
    messages: list[Message] = field(default_factory=list)
    counters: dict[int, NodeCounters] = field(default_factory=dict)
    critical_path_latency: float = 0.0
    dropped: int = 0

    def node(self, node_id: int) -> NodeCounters:
        return self.counters.setdefault(node_id, NodeCounters())

    def sent(self, node_id: int) -> int:
        return self.counters[node_id].sent if node_id in self.counters else 0

    def received(self, node_id: int) -> int:
        return self.counters[node_id].received if node_id in self.counters else 0

    @property
    def total_messages(self) -> int:
        return len(self.messages)

    @property
    def total_events(self) -> int:
        """Send plus receive events over all nodes."""
        return sum(c.sent + c.received for c in self.counters.values())

    @property
    def total_bytes(self) -> int:
        return sum(m.byte_size for m in self.messages)

    def phases(self) -> set[str]:
        return {m.round_tag.phase for m in self.messages}

    def filter(self, phase: str) -> list[Message]:
        return [m for m in self.messages if m.round_tag.phase == phase]

    def records(self) -> Iterator[dict]:
        for m in self.messages:
            yield m.to_record()

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())


def write_transcripts_jsonl(transcripts: Sequence[Transcript], path: Union[str, Path]):
    """Write several transcripts as one JSON-lines file."""
    Path(path).write_text("".join(t.to_jsonl() for t in transcripts))


@dataclass
class LatencyMatrix:
    """
    Directed per-link latencies in milliseconds over parties plus the mediator.

    latency[i][j] is the delay of a message from i to j. The diagonal is zero;
    asymmetric routes are allowed.
    """

    latency: npt.NDArray[np.float64]

    def __post_init__(self):
        lat = np.asarray(self.latency, dtype=np.float64)
        if lat.ndim != 2 or lat.shape[0] != lat.shape[1] or lat.shape[0] < 2:
            raise ValueError(f"Latency matrix must be square with >= 2 nodes, got shape {lat.shape}")
        if not np.all(np.isfinite(lat)) or np.any(lat < 0):
            raise ValueError("Latency entries must be finite and nonnegative")
        if np.any(np.diag(lat) != 0):
            raise ValueError("Latency matrix diagonal must be zero")
        self.latency = lat

    @property
    def n_plus_mediator(self) -> int:
        return int(self.latency.shape[0])

    @property
    def n_parties(self) -> int:
        return self.n_plus_mediator - 1

    @property
    def mediator(self) -> int:
        return self.n_parties

    def __call__(self, sender: int, receiver: int) -> float:
        return float(self.latency[sender, receiver])

    def to_list(self) -> list[list[float]]:
        return self.latency.tolist()

    @classmethod
    def uniform(cls, n_parties: int, value: float) -> "LatencyMatrix":
        """Every link takes `value` ms."""
        lat = np.full((n_parties + 1, n_parties + 1), float(value))
        np.fill_diagonal(lat, 0.0)
        return cls(lat)

    @classmethod
    def random(cls, n_parties: int, rng: np.random.Generator, low: float = 1.0, high: float = 100.0) -> "LatencyMatrix":
        """Independent uniform latencies per directed link."""
        lat = rng.uniform(low, high, size=(n_parties + 1, n_parties + 1))
        np.fill_diagonal(lat, 0.0)
        return cls(lat)

    @classmethod
    def from_json(cls, source: Union[str, Path, list]) -> "LatencyMatrix":
        """Load from an array-of-arrays JSON file, or from an already parsed list."""
        if isinstance(source, list):
            return cls(np.asarray(source, dtype=np.float64))
        return cls(np.asarray(json.loads(Path(source).read_text()), dtype=np.float64))


class SimNet:
    """
    Deterministic discrete-event scheduler.

    Protocols register a handler per node, seed the queue with `send`, then
    call `run_until_idle`, which drains the queue and returns the round's
    transcript. Each transcript starts at time 0.

    Example:
        >>> net = SimNet(LatencyMatrix.uniform(2, 5.0))
        >>> net.register(net.mediator, lambda msg: None)
        >>> net.send(0, net.mediator, RoundTag(0, "upload"), np.zeros(1, dtype=np.uint64))
        >>> net.run_until_idle().critical_path_latency
        5.0
    """

    def __init__(self, latency: LatencyMatrix, processing_delay: float = 0.0):
        """
        Args:
            latency: Link latencies (parties + mediator)
            processing_delay: Fixed ms charged on every message
        """
        self.latency = latency
        self.processing_delay = float(processing_delay)
        self.handlers: dict[int, Optional[Handler]] = {}
        self.now = 0.0
        self._queue: list[tuple[float, int, Message]] = []
        self._seq = 0
        self._failed: set[int] = set()
        self._transient: set[int] = set()
        self.transcript = Transcript(mediator=latency.mediator)
        self.history: list[Transcript] = []

    @property
    def mediator(self) -> int:
        return self.latency.mediator

    @property
    def n_parties(self) -> int:
        return self.latency.n_parties

    def register(self, node: int, handler: Optional[Handler] = None):
        """Attach (or replace) the delivery handler of a node."""
        if not 0 <= node < self.latency.n_plus_mediator:
            raise RoutingError(f"Node {node} is outside the latency matrix")
        self.handlers[node] = handler

    def register_all(self, handler: Optional[Handler] = None):
        """Register every node of the latency matrix with the same handler."""
        for node in range(self.latency.n_plus_mediator):
            self.register(node, handler)

    def fail(self, node: int, transient: bool = True):
        """
        Make a node stop sending. A transient failure clears when the
        current round's transcript is closed.
        """
        self._failed.add(node)
        if transient:
            self._transient.add(node)
        logger.info("Node %d marked failed (%s)", node, "transient" if transient else "permanent")

    def recover(self, node: int):
        self._failed.discard(node)
        self._transient.discard(node)

    def is_failed(self, node: int) -> bool:
        return node in self._failed

    def schedule(self, msg: Message, at: Optional[float] = None):
        """
        Queue a message sent at time `at` (default: now).

        Raises:
            RoutingError: If the receiver has no registered handler
        """
        if msg.receiver not in self.handlers:
            raise RoutingError(f"Receiver {msg.receiver} is not registered")
        if msg.sender in self._failed:
            self.transcript.dropped += 1
            logger.debug("Dropped message %d -> %d from failed sender", msg.sender, msg.receiver)
            return
        msg.send_time = self.now if at is None else float(at)
        msg.deliver_time = msg.send_time + self.latency(msg.sender, msg.receiver) + self.processing_delay
        msg.seq = self._seq
        self._seq += 1
        sender = self.transcript.node(msg.sender)
        sender.sent += 1
        sender.bytes_out += msg.byte_size
        heapq.heappush(self._queue, (msg.deliver_time, msg.seq, msg))
        logger.debug(
            "schedule %s %d -> %d at %.3f (deliver %.3f)",
            msg.round_tag.phase,
            msg.sender,
            msg.receiver,
            msg.send_time,
            msg.deliver_time,
        )

    def send(self, sender: int, receiver: int, round_tag: RoundTag, payload: Payload, at: Optional[float] = None):
        """Build and schedule a message."""
        self.schedule(Message(sender, receiver, round_tag, payload), at)

    def run_until_idle(self) -> Transcript:
        """
        Deliver queued messages until none remain, then close and return the
        transcript. The clock and transcript are reset for the next round.
        """
        while self._queue:
            deliver_time, _, msg = heapq.heappop(self._queue)
            self.now = deliver_time
            receiver = self.transcript.node(msg.receiver)
            receiver.received += 1
            receiver.bytes_in += msg.byte_size
            self.transcript.messages.append(msg)
            self.transcript.critical_path_latency = max(self.transcript.critical_path_latency, deliver_time)
            handler = self.handlers.get(msg.receiver)
            if handler is not None:
                handler(msg)
        return self._close()

    def _close(self) -> Transcript:
        transcript = self.transcript
        self.history.append(transcript)
        self.transcript = Transcript(mediator=self.mediator)
        self.now = 0.0
        self._failed -= self._transient
        self._transient.clear()
        return transcript

    def clear_history(self):
        self.history = []
