"""
Base Distillation Model

Trains a smaller student base to reproduce the feature activations of a
teacher base, so the head trained on top of the teacher can be attached to
the student unchanged.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .network_model import Batch, Matrix, NetworkSpec, ParamVector, ShapeError, forward, grad, init_params, loss_mse
from .optimizer_model import Optimizer

logger = logging.getLogger(__name__)


@dataclass
class DistillResult:
    """Student base parameters with the distillation loss after each epoch."""

    params: ParamVector
    spec: NetworkSpec
    losses: list[float] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return self.losses[0]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def _as_base_spec(spec: NetworkSpec) -> NetworkSpec:
    if spec.output_activation == "relu" and spec.head_start == spec.n_layers:
        return spec
    return spec.base_spec()


def teacher_features(teacher_spec: NetworkSpec, teacher_params: ParamVector, inputs: Matrix) -> Matrix:
    """Activations of the teacher's base on the transfer inputs."""
    base = teacher_spec.base_spec()
    base_params = ParamVector(teacher_params.values[: teacher_spec.head_offset].copy(), base.head_offset)
    return forward(base, base_params, inputs)


def distill_base(
    teacher: tuple[NetworkSpec, ParamVector],
    student_spec: NetworkSpec,
    transfer_inputs: Matrix,
    epochs: int = 50,
    alpha: float = 1e-3,
    rng: Optional[np.random.Generator] = None,
    batch_size: int = 32,
    init: Optional[ParamVector] = None,
) -> DistillResult:
    """
    Distill the teacher's base into a student base.

    The student minimizes 1/(2m) * sum ||s(x) - t(x)||^2 between its own
    ReLU features s and the teacher base features t with Adam on cyclic
    minibatches of the transfer set.

    Args:
        teacher: (full network spec, params) of the teacher
        student_spec: Student base spec (or a full spec whose base is used)
        transfer_inputs: Unlabeled inputs used for matching
        epochs: Passes over the transfer set
        alpha: Adam step size
        rng: Generator for student initialization (ignored when `init` is given)
        batch_size: Minibatch size (0 = full batch)
        init: Starting student parameters

    Returns:
        DistillResult whose `losses` has epochs + 1 entries (before training, then per epoch)

    Raises:
        ShapeError: If the student's feature width differs from the teacher's
    """
    teacher_spec, teacher_params = teacher
    student = _as_base_spec(student_spec)
    if student.output_dim != teacher_spec.base_output_dim:
        raise ShapeError(
            f"Student base output dim {student.output_dim} != teacher base output dim "
            f"{teacher_spec.base_output_dim}"
        )
    if student.input_dim != teacher_spec.input_dim:
        raise ShapeError(f"Student input dim {student.input_dim} != teacher input dim {teacher_spec.input_dim}")

    targets = teacher_features(teacher_spec, teacher_params, transfer_inputs)
    full = Batch(transfer_inputs, targets)
    if init is not None:
        params = ParamVector(init.values.copy(), student.head_offset)
    else:
        params = init_params(student, rng if rng is not None else np.random.default_rng(0))

    optimizer = Optimizer("adam", alpha)
    m = len(full)
    size = m if batch_size <= 0 else min(batch_size, m)
    losses = [loss_mse(student, params, full)]
    for epoch in range(epochs):
        for start in range(0, m, size):
            rows = slice(start, min(start + size, m))
            batch = Batch(full.inputs[rows], full.targets[rows])
            params = optimizer.step(params, grad(student, params, batch, mean=True))
        losses.append(loss_mse(student, params, full))
        logger.debug("distill epoch %d loss %.6f", epoch + 1, losses[-1])

    logger.info(
        "Distilled %d-param teacher base into %d-param student: loss %.5f -> %.5f",
        teacher_spec.head_offset,
        student.total_param_count,
        losses[0],
        losses[-1],
    )
    return DistillResult(params, student, losses)


def attach_head(
    student: DistillResult, teacher_spec: NetworkSpec, teacher_params: ParamVector
) -> tuple[NetworkSpec, ParamVector]:
    """Build the student+head network, reusing the teacher's head parameters."""
    spec = teacher_spec.with_base(student.spec)
    values = np.concatenate([student.params.values, teacher_params.values[teacher_spec.head_offset :]])
    return spec, ParamVector(values, spec.head_offset)
