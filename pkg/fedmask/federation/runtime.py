"""
Federation Runtime

Configuration, per-party state, and the mediator-side plumbing shared by
both training phases: protocol dispatch with round retries, model
broadcast, and pooled evaluation of a model over the parties' splits.
"""

import logging
import random
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..data.metrics import Metrics, metrics
from ..data.partition import PartyData
from ..models.fixed_point_model import FixedPointCodec, RingVector
from ..models.keyexchange_model import DhGroup
from ..models.network_model import Batch, EmptyBatch, NetworkSpec, ParamVector, grad, loss_mse, predict
from ..models.optimizer_model import Optimizer
from ..protocols.baselines import nosmc_round, stsmc_round
from ..protocols.masked import masked_round
from ..protocols.messages import AggregationResult, RoundAborted
from ..protocols.neighbor_graph import NeighborGraph, build_neighbor_graph
from ..protocols.shamir import shamir_round
from ..sim.simnet import RoundTag, SimNet, Transcript

logger = logging.getLogger(__name__)

OPTIMIZERS = ("sgd", "adam")
PROTOCOLS = ("nosmc", "stsmc", "shamir", "masked")
GRAPH_STRATEGIES = ("circulant", "random")


@dataclass
class FedConfig:
    """
    Federated training hyperparameters.

    Attributes:
        rounds: Aggregation rounds (default 50)
        local_updates: Optimizer steps per party between edge rounds (E)
        alpha: Learning rate
        batch_size: Minibatch size, 0 for full batch
        optimizer: 'sgd' or 'adam'
        protocol: Aggregation protocol
        k: Neighbor count (masked) or reconstruction threshold (shamir)
        weighted_mean: Edge aggregation weighted by sample counts
        personalize_epochs: Head fine-tuning epochs per party after the edge phase
        round_retries: Re-runs of an aborted aggregation with a fresh round tag
        stsmc_deliver_to_mediator: STSMC forwards the sum P0 -> mediator
        graph_strategy: 'circulant' or 'random' neighbor graph
    """

    rounds: int = 50
    local_updates: int = 1
    alpha: float = 1e-3
    batch_size: int = 16
    optimizer: str = "adam"
    protocol: str = "masked"
    k: int = 2
    weighted_mean: bool = False
    personalize_epochs: int = 0
    round_retries: int = 0
    stsmc_deliver_to_mediator: bool = False
    graph_strategy: str = "circulant"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.local_updates < 1:
            raise ValueError(f"local_updates must be >= 1, got {self.local_updates}")
        if self.batch_size < 0:
            raise ValueError(f"batch_size must be >= 0, got {self.batch_size}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got '{self.optimizer}'")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}, got '{self.protocol}'")
        if self.graph_strategy not in GRAPH_STRATEGIES:
            raise ValueError(f"graph_strategy must be one of {GRAPH_STRATEGIES}, got '{self.graph_strategy}'")
        if self.k < 0 or self.personalize_epochs < 0 or self.round_retries < 0:
            raise ValueError("k, personalize_epochs and round_retries must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    def make_optimizer(self) -> Optimizer:
        return Optimizer(self.optimizer, self.alpha, self.beta1, self.beta2, self.eps)


class PartyRuntime:
    """
    One party's local state: its data, a cyclic minibatch cursor and its
    optimizer. Raw samples never leave this object except as model inputs.
    """

    def __init__(self, data: PartyData, rng: np.random.Generator):
        self.data = data
        self.party_id = data.party_id
        self.rng = rng
        train = data.part("train")
        self.train = Batch.from_labels(train.windows, train.labels)
        self.cursor = 0
        self.order = rng.permutation(len(self.train)) if len(self.train) else np.zeros(0, dtype=np.int64)
        self.optimizer: Optional[Optimizer] = None

    @property
    def sample_count(self) -> int:
        """m_j, reported to the mediator in the clear."""
        return len(self.train)

    def next_rows(self, batch_size: int) -> npt.NDArray[np.int64]:
        """Row indices of the next cyclic minibatch (all rows for batch_size 0)."""
        m = len(self.train)
        if m == 0:
            raise EmptyBatch(f"Party {self.party_id} has no training samples")
        if batch_size <= 0 or batch_size >= m:
            return np.arange(m)
        rows = np.take(self.order, np.arange(self.cursor, self.cursor + batch_size), mode="wrap")
        self.cursor = (self.cursor + batch_size) % m
        return rows

    def next_batch(self, batch_size: int) -> Batch:
        rows = self.next_rows(batch_size)
        return Batch(self.train.inputs[rows], self.train.targets[rows])


def make_runtimes(parties: Sequence[PartyData], seed: int = 0) -> list[PartyRuntime]:
    """Party runtimes with pre-split per-party generators."""
    streams = np.random.SeedSequence([seed, 7]).spawn(len(parties))
    return [PartyRuntime(p, np.random.default_rng(s)) for p, s in zip(parties, streams)]


class Mediator:
    """
    Runs aggregation rounds over the configured protocol and keeps every
    transcript. Round tags increase monotonically so a retried round never
    reuses a mask stream.
    """

    def __init__(
        self,
        config: FedConfig,
        net: SimNet,
        graph: Optional[NeighborGraph] = None,
        codec: Optional[FixedPointCodec] = None,
        seed: int = 0,
        group: Optional[DhGroup] = None,
    ):
        self.config = config
        self.net = net
        self.codec = codec if codec is not None else FixedPointCodec()
        self.protocol_rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
        n = net.n_parties
        if graph is None and config.protocol == "masked":
            graph = build_neighbor_graph(
                n,
                min(config.k, n - 1),
                random.Random(seed),
                group,
                config.graph_strategy,
            )
        self.graph = graph
        self.next_tag = 0
        self.transcripts: list[Transcript] = []
        self.broadcasts: list[Transcript] = []

    def _run(self, secrets: Sequence[RingVector], tag: int) -> AggregationResult:
        protocol = self.config.protocol
        if protocol == "masked":
            assert self.graph is not None
            return masked_round(secrets, self.graph, tag, self.net)
        if protocol == "nosmc":
            return nosmc_round(secrets, self.net, tag)
        if protocol == "stsmc":
            return stsmc_round(secrets, self.protocol_rng, self.net, tag, self.config.stsmc_deliver_to_mediator)
        return shamir_round(secrets, self.config.k, self.net, self.protocol_rng, tag)

    def aggregate(self, secrets: Sequence[RingVector]) -> AggregationResult:
        """
        Ring sum of the parties' secrets via the configured protocol.

        Raises:
            RoundAborted: When the round and all its retries fail
        """
        failures = 0
        while True:
            tag = self.next_tag
            self.next_tag += 1
            try:
                result = self._run(secrets, tag)
            except RoundAborted as exc:
                self.transcripts.append(self.net.history[-1])
                failures += 1
                if failures > self.config.round_retries:
                    raise
                logger.warning("%s; retrying with round tag %d", exc, self.next_tag)
                continue
            self.transcripts.append(result.transcript)
            return result

    def broadcast(self, values: npt.NDArray[np.float64], phase: str = "broadcast") -> Transcript:
        """Send a float vector from the mediator to every party."""
        payload = np.ascontiguousarray(values, dtype="<f8").view(np.uint64)
        self.net.register_all(None)
        tag = RoundTag(max(self.next_tag - 1, 0), phase)
        for party in range(self.net.n_parties):
            self.net.send(self.net.mediator, party, tag, payload)
        transcript = self.net.run_until_idle()
        self.broadcasts.append(transcript)
        return transcript


@dataclass
class Evaluation:
    """Loss and classification metrics of a model on pooled data."""

    loss: float
    metrics: Metrics


def pooled_batch(parties: Sequence[PartyData], split: str) -> Batch:
    """Union of the parties' split as one batch (evaluation harness only)."""
    parts = [p.part(split) for p in parties]
    inputs = np.concatenate([d.windows for d in parts])
    labels = np.concatenate([d.labels for d in parts])
    return Batch.from_labels(inputs, labels)


def evaluate(spec: NetworkSpec, params: ParamVector, batch: Batch) -> Evaluation:
    """Squared-error loss and metrics of params on a labeled batch."""
    labels = np.argmax(batch.targets, axis=1)
    return Evaluation(loss_mse(spec, params, batch), metrics(predict(spec, params, batch.inputs), labels))


@dataclass
class RoundRecord:
    """
    One row of the metrics log.

    `round` is the round number or 'personal:<party>' for personalization rows.
    """

    round: object
    global_loss: float
    val_accuracy: float
    precision: float
    recall: float
    f1: float
    messages: int
    bytes: int
    latency_ms: float
    val_loss: float = field(default=float("nan"), repr=False)

    CSV_COLUMNS = ("round", "global_loss", "val_accuracy", "precision", "recall", "f1", "messages", "bytes", "latency_ms")

    def csv_row(self) -> list:
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def round_record(
    round_index: object,
    spec: NetworkSpec,
    params: ParamVector,
    train: Batch,
    val: Batch,
    transcripts: Sequence[Transcript] = (),
    latency_ms: float = 0.0,
) -> RoundRecord:
    """Evaluate params and fold the round's traffic into a RoundRecord."""
    val_eval = evaluate(spec, params, val)
    return RoundRecord(
        round=round_index,
        global_loss=loss_mse(spec, params, train),
        val_accuracy=val_eval.metrics.accuracy,
        precision=val_eval.metrics.precision,
        recall=val_eval.metrics.recall,
        f1=val_eval.metrics.f1,
        messages=sum(t.total_messages for t in transcripts),
        bytes=sum(t.total_bytes for t in transcripts),
        latency_ms=latency_ms,
        val_loss=val_eval.loss,
    )


def train_centralized(
    spec: NetworkSpec,
    params: ParamVector,
    batch: Batch,
    epochs: int,
    config: FedConfig,
    rng: np.random.Generator,
) -> ParamVector:
    """
    Plain (non-federated) training on one batch, for reference models.

    Every epoch shuffles the rows and takes one optimizer step per
    minibatch of config.batch_size rows (full batch when 0).
    """
    if len(batch) == 0:
        raise EmptyBatch("Centralized training needs at least one sample")
    optimizer = config.make_optimizer()
    m = len(batch)
    size = m if config.batch_size <= 0 else min(config.batch_size, m)
    for _ in range(epochs):
        order = rng.permutation(m)
        for start in range(0, m, size):
            rows = order[start : start + size]
            params = optimizer.step(params, grad(spec, params, Batch(batch.inputs[rows], batch.targets[rows]), mean=True))
    return params
