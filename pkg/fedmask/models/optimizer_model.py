"""
Optimizer Reference Model

Plain gradient descent and Adam over flat parameter vectors. A head-only
gradient updates only the head slice; the base slice is carried over
untouched.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt

from .network_model import ParamVector, ShapeError


def _target_slice(params: ParamVector, gradient: ParamVector) -> slice:
    """Region of params.values a gradient applies to."""
    if params.head_only:
        raise ShapeError("Optimizer steps need a full parameter vector")
    if gradient.head_only:
        if len(gradient) != len(params) - params.head_offset:
            raise ShapeError(
                f"Head gradient of size {len(gradient)} does not match head of size "
                f"{len(params) - params.head_offset}"
            )
        return slice(params.head_offset, len(params))
    if len(gradient) != len(params):
        raise ShapeError(f"Gradient of size {len(gradient)} does not match params of size {len(params)}")
    return slice(0, len(params))


def sgd_step(params: ParamVector, gradient: ParamVector, alpha: float) -> ParamVector:
    """
    One gradient-descent step W <- W - alpha * grad.

    Args:
        params: Full parameter vector
        gradient: Full or head-only gradient
        alpha: Learning rate

    Returns:
        New ParamVector; params is not modified

    Raises:
        ShapeError: If the gradient does not fit params
    """
    region = _target_slice(params, gradient)
    values = params.values.copy()
    values[region] -= alpha * gradient.values
    return ParamVector(values, params.head_offset)


@dataclass
class AdamState:
    """
    First/second moment estimates and step count.

    A fresh state (empty moments) adopts the size of the first gradient it sees.
    """

    m: npt.NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    v: npt.NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    t: int = 0

    @property
    def is_fresh(self) -> bool:
        return self.t == 0 and self.m.size == 0

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.t)


def adam_step(
    state: Optional[AdamState],
    params: ParamVector,
    gradient: ParamVector,
    alpha: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[ParamVector, AdamState]:
    """
    One bias-corrected Adam update.

    Args:
        state: Moment state from the previous step (None or fresh to start)
        params: Full parameter vector
        gradient: Full or head-only gradient
        alpha: Step size
        beta1: First moment decay
        beta2: Second moment decay
        eps: Denominator stabilizer

    Returns:
        (updated params, updated state); inputs are not modified

    Raises:
        ShapeError: If gradient and state or params sizes disagree
    """
    region = _target_slice(params, gradient)
    g = gradient.values
    if state is None or state.is_fresh:
        state = AdamState(np.zeros_like(g), np.zeros_like(g), 0)
    elif state.m.size != g.size:
        raise ShapeError(f"Adam state of size {state.m.size} does not match gradient of size {g.size}")

    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * g
    v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)

    values = params.values.copy()
    values[region] -= alpha * m_hat / (np.sqrt(v_hat) + eps)
    return ParamVector(values, params.head_offset), AdamState(m, v, t)


class Optimizer:
    """
    Stateful wrapper used by training loops: `step(params, grad)` dispatches
    to sgd_step or adam_step and keeps Adam's moments between calls.
    """

    def __init__(self, kind: str = "adam", alpha: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if kind not in ("sgd", "adam"):
            raise ValueError(f"Unknown optimizer '{kind}', expected 'sgd' or 'adam'")
        self.kind = kind
        self.alpha = alpha
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state: Optional[AdamState] = None

    def step(self, params: ParamVector, gradient: ParamVector) -> ParamVector:
        if self.kind == "sgd":
            return sgd_step(params, gradient, self.alpha)
        params, self.state = adam_step(self.state, params, gradient, self.alpha, self.beta1, self.beta2, self.eps)
        return params

    def reset(self):
        """Drop accumulated moments."""
        self.state = None
