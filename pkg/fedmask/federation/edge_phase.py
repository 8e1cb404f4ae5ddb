"""
Edge Phase and Personalization

Head-only federated training on top of a frozen base. In each round every
party runs E local optimizer steps on its head, quantizes the resulting head
weights and submits them; the mediator averages them into the new global
head and broadcasts it. Afterwards each party may fine-tune the global head
on its own data.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..data.metrics import Metrics
from ..data.partition import PartyData
from ..models.fixed_point_model import FixedPointCodec
from ..models.network_model import Batch, EmptyBatch, NetworkSpec, ParamVector, base_features, grad_head, init_params
from ..protocols.neighbor_graph import NeighborGraph
from ..sim.simnet import SimNet
from .init_phase import PhaseResult
from .runtime import FedConfig, Mediator, PartyRuntime, evaluate, make_runtimes, pooled_batch, round_record

logger = logging.getLogger(__name__)


def base_digest(params: ParamVector) -> str:
    """SHA-256 of the base slice, used to prove the base never changed."""
    return hashlib.sha256(np.ascontiguousarray(params.base, dtype="<f8").tobytes()).hexdigest()


def edge_start_params(spec: NetworkSpec, base_values: np.ndarray, rng: np.random.Generator) -> ParamVector:
    """Full parameter vector with the given (distilled) base and a fresh head."""
    fresh = init_params(spec, rng)
    if base_values.size != spec.head_offset:
        raise ValueError(f"Base has {base_values.size} values, spec expects {spec.head_offset}")
    values = fresh.values.copy()
    values[: spec.head_offset] = base_values
    return ParamVector(values, spec.head_offset)


@dataclass
class EdgeResult(PhaseResult):
    """PhaseResult plus the base digests taken before and after training."""

    base_before: str = ""
    base_after: str = ""

    @property
    def base_frozen(self) -> bool:
        return self.base_before == self.base_after


def local_head_update(
    party: PartyRuntime,
    spec: NetworkSpec,
    params: ParamVector,
    features: np.ndarray,
    config: FedConfig,
) -> ParamVector:
    """E optimizer steps on the head from the current global params."""
    if party.optimizer is None:
        party.optimizer = config.make_optimizer()
    local = params
    for _ in range(config.local_updates):
        rows = party.next_rows(config.batch_size)
        batch = Batch(features[rows], party.train.targets[rows])
        g = grad_head(spec, local, batch, mean=True, features=features[rows])
        local = party.optimizer.step(local, g)
    return local


def run_edge_phase(
    parties: Sequence[PartyData],
    spec: NetworkSpec,
    params: ParamVector,
    config: FedConfig,
    net: SimNet,
    graph: Optional[NeighborGraph] = None,
    codec: Optional[FixedPointCodec] = None,
    seed: int = 0,
) -> EdgeResult:
    """
    Federated head-only training with weight averaging.

    Args:
        parties: Patient datasets with splits
        spec: Full network; layers from spec.head_start_layer on are trained
        params: Starting parameters holding the frozen (distilled) base
        config: Federated hyperparameters; local_updates is E
        net: Simulated network
        graph: Neighbor graph for the masked protocol (built from config if None)
        codec: Fixed-point codec
        seed: Scenario seed

    Returns:
        EdgeResult with the global parameters and base digests

    Raises:
        RoundAborted: If an aggregation fails after all retries
    """
    runtimes = make_runtimes(parties, seed)
    mediator = Mediator(config, net, graph, codec, seed)
    codec = mediator.codec
    features = [base_features(spec, params, r.train.inputs) for r in runtimes]
    counts = np.array([r.sample_count for r in runtimes], dtype=np.float64)
    # weighted uploads are head * m_j / sum(m) and sum directly to the weighted mean
    shares = counts / counts.sum() if config.weighted_mean else np.ones(len(runtimes))
    denominator = 1.0 if config.weighted_mean else float(len(runtimes))
    train_all = pooled_batch(parties, "train")
    val_all = pooled_batch(parties, "val")
    result = EdgeResult(params, base_before=base_digest(params))

    logger.info(
        "Edge phase: %d parties, training %d of %d params (%.2f%%), E=%d, protocol=%s",
        len(parties),
        spec.head_param_count,
        spec.total_param_count,
        100.0 * spec.head_fraction,
        config.local_updates,
        config.protocol,
    )
    for round_index in range(1, config.rounds + 1):
        secrets = []
        for party, feats, share in zip(runtimes, features, shares):
            head = local_head_update(party, spec, params, feats, config).head
            secrets.append(codec.quantize_vector(head * share))

        n_before = len(mediator.transcripts)
        agg = mediator.aggregate(secrets)
        params = params.with_head(codec.dequantize_vector(agg.sum) / denominator)
        broadcast = mediator.broadcast(params.head)

        round_transcripts = mediator.transcripts[n_before:] + [broadcast]
        record = round_record(round_index, spec, params, train_all, val_all, round_transcripts, agg.transcript.critical_path_latency)
        result.history.append(record)
        result.trajectory.append(params)
        logger.info(
            "edge round %d: loss %.5f val_acc %.3f messages %d latency %.2f ms",
            round_index,
            record.global_loss,
            record.val_accuracy,
            record.messages,
            record.latency_ms,
        )

    result.params = params
    result.transcripts = mediator.transcripts
    result.broadcasts = mediator.broadcasts
    result.base_after = base_digest(params)
    if result.base_frozen:
        logger.info("base frozen: ok")
    else:
        logger.error("base frozen: FAILED (%s -> %s)", result.base_before[:12], result.base_after[:12])
    return result


@dataclass
class PersonalResult:
    """A party's personalized parameters with global vs. personal test metrics."""

    party_id: int
    params: ParamVector
    global_test: Metrics
    personal_test: Metrics
    best_epoch: int

    @property
    def improvement(self) -> float:
        return self.personal_test.accuracy - self.global_test.accuracy


def personalize(
    global_params: ParamVector,
    party: PartyData,
    spec: NetworkSpec,
    config: FedConfig,
    epochs: Optional[int] = None,
    seed: int = 0,
) -> PersonalResult:
    """
    Fine-tune the global head on one party's training split.

    The head with the best validation accuracy (the global head included,
    ties kept on the earlier epoch) is returned. The base is never updated.

    Args:
        global_params: Parameters after the edge phase
        party: The party's data
        spec: Network description
        config: Supplies optimizer, alpha and batch_size
        epochs: Passes over the train split (default config.personalize_epochs)
        seed: Seed of the party's minibatch order

    Raises:
        EmptyBatch: If the party has no training samples
    """
    epochs = config.personalize_epochs if epochs is None else epochs
    runtime = PartyRuntime(party, np.random.default_rng([seed, party.party_id, 13]))
    if runtime.sample_count == 0:
        raise EmptyBatch(f"Party {party.party_id} has no training samples")
    val = party.part("val")
    test = party.part("test")
    val_batch = Batch.from_labels(val.windows, val.labels) if len(val) else None
    test_batch = Batch.from_labels(test.windows, test.labels)

    def val_score(p: ParamVector) -> tuple[float, float]:
        if val_batch is None:
            return (0.0, 0.0)
        ev = evaluate(spec, p, val_batch)
        return (ev.metrics.accuracy, -ev.loss)

    features = base_features(spec, global_params, runtime.train.inputs)
    steps_per_epoch = 1 if config.batch_size <= 0 else -(-runtime.sample_count // config.batch_size)
    step_config = FedConfig(
        rounds=1,
        local_updates=steps_per_epoch,
        alpha=config.alpha,
        batch_size=config.batch_size,
        optimizer=config.optimizer,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
    )

    best, best_score, best_epoch = global_params, val_score(global_params), 0
    current = global_params
    for epoch in range(1, epochs + 1):
        current = local_head_update(runtime, spec, current, features, step_config)
        score = val_score(current)
        if score > best_score:
            best, best_score, best_epoch = current, score, epoch

    result = PersonalResult(
        party.party_id,
        best,
        evaluate(spec, global_params, test_batch).metrics,
        evaluate(spec, best, test_batch).metrics,
        best_epoch,
    )
    logger.info(
        "party %d personalized: test acc %.3f -> %.3f (best epoch %d)",
        party.party_id,
        result.global_test.accuracy,
        result.personal_test.accuracy,
        best_epoch,
    )
    return result
