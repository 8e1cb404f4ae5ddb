"""
Distillation Experiment

Trains a reference network centrally, distills its base into a smaller
student base, and compares three networks sharing the reference head:
the reference itself, the distilled student, and an untrained student.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from ..data.partition import split_shard
from ..generators.signal_gen import GeneratorConfig, generate
from ..models.distill_model import DistillResult, attach_head, distill_base
from ..models.network_model import Batch, NetworkSpec, ParamVector, init_params
from .runtime import FedConfig, evaluate, train_centralized

logger = logging.getLogger(__name__)

STUDENT_LAYERS = (32, 16, 32)


@dataclass
class DistillationReport:
    """Test accuracies of the three networks and the sizes of both bases."""

    seed: int
    teacher_accuracy: float
    student_accuracy: float
    baseline_accuracy: float
    teacher_base_params: int
    student_base_params: int
    distill_loss_initial: float
    distill_loss_final: float

    @property
    def ordered(self) -> bool:
        return self.teacher_accuracy >= self.student_accuracy >= self.baseline_accuracy

    def to_dict(self) -> dict:
        return asdict(self)


def student_network(
    teacher_spec: NetworkSpec,
    teacher_params: ParamVector,
    student_layer_sizes: Sequence[int],
    transfer_inputs: np.ndarray,
    epochs: int = 50,
    alpha: float = 1e-3,
    rng: Optional[np.random.Generator] = None,
) -> tuple[NetworkSpec, ParamVector, DistillResult]:
    """
    Distill the teacher's base and put the teacher's head on top.

    Returns:
        (student network spec, student network params, distillation result)
    """
    student_base = NetworkSpec(tuple(student_layer_sizes), len(student_layer_sizes) - 1, "relu")
    result = distill_base((teacher_spec, teacher_params), student_base, transfer_inputs, epochs, alpha, rng)
    spec, params = attach_head(result, teacher_spec, teacher_params)
    return spec, params, result


def distillation_experiment(
    seed: int = 0,
    teacher_spec: Optional[NetworkSpec] = None,
    student_layer_sizes: Sequence[int] = STUDENT_LAYERS,
    n_samples: int = 600,
    heterogeneity: float = 0.0,
    train_epochs: int = 30,
    distill_epochs: int = 50,
    alpha: float = 1e-3,
    config: Optional[GeneratorConfig] = None,
) -> DistillationReport:
    """
    Teacher / distilled student / untrained student on one synthetic dataset.

    The teacher is trained centrally on the train split. The student base
    is distilled on the (unlabeled) train inputs. All three networks share
    the teacher's head and are scored on the test split.
    """
    teacher_spec = teacher_spec if teacher_spec is not None else NetworkSpec()
    streams = np.random.SeedSequence([seed, 17]).spawn(4)
    data = generate(n_samples, teacher_spec.input_dim, seed, heterogeneity, 0, config)
    shard = split_shard(0, np.arange(len(data)), np.random.default_rng(streams[0]))
    train = data.subset(shard.train)
    test = data.subset(shard.test)
    train_batch = Batch.from_labels(train.windows, train.labels)
    test_batch = Batch.from_labels(test.windows, test.labels)

    teacher_params = train_centralized(
        teacher_spec,
        init_params(teacher_spec, np.random.default_rng(streams[1])),
        train_batch,
        train_epochs,
        FedConfig(alpha=alpha),
        np.random.default_rng(streams[2]),
    )
    spec, student_params, result = student_network(
        teacher_spec,
        teacher_params,
        student_layer_sizes,
        train.windows,
        distill_epochs,
        alpha,
        np.random.default_rng(streams[3]),
    )
    # same stream as the student initialization: the baseline is the student before distillation
    untrained = init_params(result.spec, np.random.default_rng(streams[3]))
    baseline_params = ParamVector(
        np.concatenate([untrained.values, teacher_params.values[teacher_spec.head_offset :]]), spec.head_offset
    )

    report = DistillationReport(
        seed=seed,
        teacher_accuracy=evaluate(teacher_spec, teacher_params, test_batch).metrics.accuracy,
        student_accuracy=evaluate(spec, student_params, test_batch).metrics.accuracy,
        baseline_accuracy=evaluate(spec, baseline_params, test_batch).metrics.accuracy,
        teacher_base_params=teacher_spec.head_offset,
        student_base_params=result.spec.total_param_count,
        distill_loss_initial=result.initial_loss,
        distill_loss_final=result.final_loss,
    )
    logger.info(
        "seed %d: teacher %.3f (%d base params), student %.3f (%d), untrained %.3f",
        seed,
        report.teacher_accuracy,
        report.teacher_base_params,
        report.student_accuracy,
        report.student_base_params,
        report.baseline_accuracy,
    )
    return report
