"""
Two-phase federated training over secure aggregation.

The init phase trains the full network from aggregated gradients; the edge
phase trains only the head over a frozen (distilled) base by averaging
weights. Sweeps, the distillation experiment, the data-locality scanner and
checkpoint/metric files live here too.
"""

from .runtime import (
    Evaluation,
    FedConfig,
    Mediator,
    PartyRuntime,
    RoundRecord,
    evaluate,
    make_runtimes,
    pooled_batch,
    round_record,
    train_centralized,
)
from .init_phase import PhaseResult, run_init_phase
from .edge_phase import EdgeResult, PersonalResult, base_digest, edge_start_params, personalize, run_edge_phase
from .sweep import (
    NOT_REACHED,
    SWEEP_COLUMNS,
    PartitionPoint,
    SweepRow,
    edge_sweep_runner,
    local_updates_sweep,
    partition_sweep,
    rounds_to_threshold,
)
from .distillation import DistillationReport, distillation_experiment, student_network
from .locality import LocalityHit, LocalityReport, scan_transcripts
from .checkpoint import (
    Checkpoint,
    CheckpointError,
    check_spec,
    csv_text,
    load_checkpoint,
    save_checkpoint,
    write_atomic,
    write_metrics_csv,
)

__all__ = [
    "Evaluation",
    "FedConfig",
    "Mediator",
    "PartyRuntime",
    "RoundRecord",
    "evaluate",
    "make_runtimes",
    "pooled_batch",
    "round_record",
    "train_centralized",
    "PhaseResult",
    "run_init_phase",
    "EdgeResult",
    "PersonalResult",
    "base_digest",
    "edge_start_params",
    "personalize",
    "run_edge_phase",
    "NOT_REACHED",
    "SWEEP_COLUMNS",
    "PartitionPoint",
    "SweepRow",
    "edge_sweep_runner",
    "local_updates_sweep",
    "partition_sweep",
    "rounds_to_threshold",
    "DistillationReport",
    "distillation_experiment",
    "student_network",
    "LocalityHit",
    "LocalityReport",
    "scan_transcripts",
    "Checkpoint",
    "CheckpointError",
    "csv_text",
    "load_checkpoint",
    "check_spec",
    "save_checkpoint",
    "write_atomic",
    "write_metrics_csv",
]
