"""
Reference models for secure aggregation and federated training.

This package holds the numeric building blocks (fixed-point ring, prime
field, key agreement and mask streams) and the dense network with its
optimizers and base distillation.
"""

from .fixed_point_model import (
    RING_MODULUS,
    FixedPointCodec,
    RingVector,
    as_ring,
    random_ring_vector,
    ring_add,
    ring_sub,
    ring_sum,
    ring_zeros,
)
from .field_model import FIELD_PRIME, FieldElement, FieldOverflowError
from .keyexchange_model import DhGroup, InvalidPublicValue, SharedSeed, dh_keypair, dh_shared, mask_stream
from .network_model import (
    Batch,
    EmptyBatch,
    NetworkSpec,
    ParamVector,
    ShapeError,
    base_features,
    forward,
    grad,
    grad_head,
    init_params,
    loss_mse,
    predict,
)
from .optimizer_model import AdamState, Optimizer, adam_step, sgd_step
from .distill_model import DistillResult, attach_head, distill_base

__all__ = [
    "RING_MODULUS",
    "FixedPointCodec",
    "RingVector",
    "as_ring",
    "random_ring_vector",
    "ring_add",
    "ring_sub",
    "ring_sum",
    "ring_zeros",
    "FIELD_PRIME",
    "FieldElement",
    "FieldOverflowError",
    "DhGroup",
    "InvalidPublicValue",
    "SharedSeed",
    "dh_keypair",
    "dh_shared",
    "mask_stream",
    "Batch",
    "EmptyBatch",
    "NetworkSpec",
    "ParamVector",
    "ShapeError",
    "base_features",
    "forward",
    "grad",
    "grad_head",
    "init_params",
    "loss_mse",
    "predict",
    "AdamState",
    "Optimizer",
    "adam_step",
    "sgd_step",
    "DistillResult",
    "attach_head",
    "distill_base",
]
