"""
Initialization Phase

Hospital-phase training of the full network by aggregated gradients. Each
round every party computes the unnormalized gradient of its batch,
quantizes it, and submits it through the aggregation protocol. The mediator
dequantizes the sum, divides by the total sample count, applies the
optimizer and broadcasts the new parameters.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..data.partition import PartyData
from ..models.fixed_point_model import FixedPointCodec
from ..models.network_model import NetworkSpec, ParamVector, grad, init_params
from ..protocols.neighbor_graph import NeighborGraph
from ..sim.simnet import SimNet, Transcript
from .runtime import FedConfig, Mediator, RoundRecord, make_runtimes, pooled_batch, round_record

logger = logging.getLogger(__name__)


@dataclass
class PhaseResult:
    """
    Outcome of a training phase.

    Attributes:
        params: Final global parameters
        history: One RoundRecord per round
        transcripts: Aggregation transcripts in order (aborted attempts included)
        broadcasts: Broadcast transcripts in order
        global_gradients: Per-round dequantized global gradient (init phase only)
        trajectory: Global parameters after each round
    """

    params: ParamVector
    history: list[RoundRecord] = field(default_factory=list)
    transcripts: list[Transcript] = field(default_factory=list)
    broadcasts: list[Transcript] = field(default_factory=list)
    global_gradients: list[np.ndarray] = field(default_factory=list)
    trajectory: list[ParamVector] = field(default_factory=list)


def run_init_phase(
    parties: Sequence[PartyData],
    spec: NetworkSpec,
    config: FedConfig,
    net: SimNet,
    params: Optional[ParamVector] = None,
    graph: Optional[NeighborGraph] = None,
    codec: Optional[FixedPointCodec] = None,
    seed: int = 0,
) -> PhaseResult:
    """
    Train the full network with aggregated gradients.

    Args:
        parties: Hospital datasets with splits, one per party
        spec: Network description
        config: Federated hyperparameters (rounds, alpha, batch_size, optimizer, protocol, k)
        net: Simulated network (parties + mediator)
        params: Starting parameters (Glorot initialization from `seed` if None)
        graph: Neighbor graph for the masked protocol (built from config if None)
        codec: Fixed-point codec
        seed: Scenario seed

    Returns:
        PhaseResult with the trained parameters and per-round records

    Raises:
        RoundAborted: If an aggregation fails after all retries
    """
    runtimes = make_runtimes(parties, seed)
    mediator = Mediator(config, net, graph, codec, seed)
    codec = mediator.codec
    if params is None:
        params = init_params(spec, np.random.default_rng(np.random.SeedSequence([seed, 3])))
    optimizer = config.make_optimizer()
    train_all = pooled_batch(parties, "train")
    val_all = pooled_batch(parties, "val")
    result = PhaseResult(params)

    logger.info(
        "Init phase: %d parties, %d params, protocol=%s, %d rounds",
        len(parties),
        spec.total_param_count,
        config.protocol,
        config.rounds,
    )
    for round_index in range(1, config.rounds + 1):
        secrets = []
        total_m = 0
        for party in runtimes:
            batch = party.next_batch(config.batch_size)
            total_m += len(batch)
            local = grad(spec, params, batch)
            secrets.append(codec.quantize_vector(local.values))
            logger.debug("party %d: gradient over %d samples", party.party_id, len(batch))

        n_before = len(mediator.transcripts)
        agg = mediator.aggregate(secrets)
        global_grad = codec.dequantize_vector(agg.sum) / total_m
        params = optimizer.step(params, ParamVector(global_grad, params.head_offset))
        broadcast = mediator.broadcast(params.values)

        round_transcripts = mediator.transcripts[n_before:] + [broadcast]
        record = round_record(round_index, spec, params, train_all, val_all, round_transcripts, agg.transcript.critical_path_latency)
        result.history.append(record)
        result.global_gradients.append(global_grad)
        result.trajectory.append(params)
        logger.info(
            "round %d: loss %.5f val_acc %.3f messages %d latency %.2f ms",
            round_index,
            record.global_loss,
            record.val_accuracy,
            record.messages,
            record.latency_ms,
        )

    result.params = params
    result.transcripts = mediator.transcripts
    result.broadcasts = mediator.broadcasts
    return result
