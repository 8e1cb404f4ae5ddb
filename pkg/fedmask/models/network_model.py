"""
Dense Network Reference Model

Configurable dense ReLU network with a softmax output, an explicit base/head
partition, the squared-error loss J = 1/(2m) * sum ||h(X) - y||^2
and hand-written backpropagation. Parameters live in one flat float64 vector
so that they can be quantized, masked and aggregated as a whole.
"""

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt

Matrix = npt.NDArray[np.float64]

ACTIVATIONS = ("softmax", "relu")

_PARAM_MAGIC = b"FMPV"


class ShapeError(ValueError):
    """Raised when vector or matrix dimensions do not match the network."""

    pass  # pylint: disable=unnecessary-pass


class EmptyBatch(ValueError):
    """Raised when an operation needs at least one sample."""

    pass  # pylint: disable=unnecessary-pass


@dataclass(frozen=True)
class LayerSlice:
    """Offsets of one dense layer inside the flat parameter vector."""

    weight_offset: int
    bias_offset: int
    fan_in: int
    fan_out: int

    @property
    def end(self) -> int:
        """First offset after this layer's biases."""
        return self.bias_offset + self.fan_out


@dataclass(frozen=True)
class NetworkSpec:
    """
    Dense network description.

    Attributes:
        layer_sizes: Input dim, hidden dims, output dim
        head_start_layer: Index of the first head layer (layers are 0-based).
            0 makes the whole network trainable head; len(layers) leaves an
            empty head (a pure feature extractor).
        output_activation: 'softmax' for classifiers, 'relu' for base-only
            feature extractors used in distillation
    """

    layer_sizes: tuple[int, ...] = (32, 64, 32, 2)
    head_start_layer: Optional[int] = None
    output_activation: str = "softmax"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ShapeError(f"layer_sizes needs >= 2 positive entries, got {sizes}")
        if self.head_start_layer is None:
            object.__setattr__(self, "head_start_layer", self.n_layers - 1)
        if not 0 <= self.head_start_layer <= self.n_layers:  # type: ignore[operator]
            raise ShapeError(
                f"head_start_layer {self.head_start_layer} outside [0, {self.n_layers}]"
            )
        if self.output_activation not in ACTIVATIONS:
            raise ShapeError(f"Unknown output activation '{self.output_activation}'")

    @property
    def n_layers(self) -> int:
        """Number of dense layers."""
        return len(self.layer_sizes) - 1

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def head_start(self) -> int:
        """head_start_layer as a plain int."""
        return int(self.head_start_layer)  # type: ignore[arg-type]

    @property
    def layout(self) -> tuple[LayerSlice, ...]:
        """Per-layer (weights, biases) offsets, weights stored row-major (fan_in x fan_out)."""
        slices = []
        offset = 0
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            slices.append(LayerSlice(offset, offset + fan_in * fan_out, fan_in, fan_out))
            offset += fan_in * fan_out + fan_out
        return tuple(slices)

    @property
    def total_param_count(self) -> int:
        return self.layout[-1].end

    @property
    def head_offset(self) -> int:
        """Index where head parameters begin."""
        if self.head_start == self.n_layers:
            return self.total_param_count
        return self.layout[self.head_start].weight_offset

    @property
    def head_param_count(self) -> int:
        return self.total_param_count - self.head_offset

    @property
    def head_fraction(self) -> float:
        """Trainable share of parameters during edge training."""
        return self.head_param_count / self.total_param_count

    @property
    def base_output_dim(self) -> int:
        """Width of the features the base hands to the head."""
        return self.layer_sizes[self.head_start]

    def base_spec(self) -> "NetworkSpec":
        """Spec of the base alone, ending in ReLU features."""
        if self.head_start == 0:
            raise ShapeError("Network has an empty base")
        return NetworkSpec(self.layer_sizes[: self.head_start + 1], self.head_start, "relu")

    def with_base(self, base: "NetworkSpec") -> "NetworkSpec":
        """Replace the base with another base producing the same feature width."""
        if base.output_dim != self.base_output_dim:
            raise ShapeError(
                f"Base output dim {base.output_dim} does not match head input {self.base_output_dim}"
            )
        head_sizes = self.layer_sizes[self.head_start + 1 :]
        return NetworkSpec(base.layer_sizes + head_sizes, base.n_layers, self.output_activation)

    def with_head_start(self, head_start_layer: int) -> "NetworkSpec":
        """Same layers with a different base/head split."""
        return NetworkSpec(self.layer_sizes, head_start_layer, self.output_activation)

    def to_dict(self) -> dict:
        return {"layer_sizes": list(self.layer_sizes), "head_start_layer": self.head_start}


@dataclass
class ParamVector:
    """
    Flat parameter (or gradient) vector with its base/head partition.

    A head-only vector carries just values[head_offset:] of the full layout
    and has `head_only` set.
    """

    values: npt.NDArray[np.float64]
    head_offset: int
    head_only: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def base(self) -> npt.NDArray[np.float64]:
        if self.head_only:
            return np.zeros(0)
        return self.values[: self.head_offset]

    @property
    def head(self) -> npt.NDArray[np.float64]:
        if self.head_only:
            return self.values
        return self.values[self.head_offset :]

    def head_slice(self) -> "ParamVector":
        """Head parameters as a head-only vector."""
        return ParamVector(self.head.copy(), self.head_offset, head_only=True)

    def with_head(self, head: npt.ArrayLike) -> "ParamVector":
        """Copy of a full vector with the head replaced."""
        head = np.asarray(head, dtype=np.float64)
        if self.head_only or head.size != self.values.size - self.head_offset:
            raise ShapeError(f"Head of size {head.size} does not fit vector of size {len(self)}")
        values = self.values.copy()
        values[self.head_offset :] = head
        return ParamVector(values, self.head_offset)

    def copy(self) -> "ParamVector":
        return ParamVector(self.values.copy(), self.head_offset, self.head_only)

    def to_bytes(self) -> bytes:
        """Little-endian float64 values behind a length header."""
        header = struct.pack("<4sQQ?", _PARAM_MAGIC, self.values.size, self.head_offset, self.head_only)
        return header + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ParamVector":
        header_size = struct.calcsize("<4sQQ?")
        magic, length, head_offset, head_only = struct.unpack("<4sQQ?", data[:header_size])
        if magic != _PARAM_MAGIC:
            raise ShapeError("Not a serialized parameter vector")
        body = data[header_size:]
        if len(body) != 8 * length:
            raise ShapeError(f"Expected {length} float64 values, found {len(body) // 8}")
        return cls(np.frombuffer(body, dtype="<f8").astype(np.float64), head_offset, head_only)


@dataclass
class Batch:
    """Inputs (samples x input dim) with one-hot targets (samples x classes)."""

    inputs: Matrix
    targets: Matrix

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=np.float64))
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ShapeError(
                f"{self.inputs.shape[0]} input rows vs {self.targets.shape[0]} target rows"
            )

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    @classmethod
    def from_labels(cls, inputs: Matrix, labels: npt.ArrayLike, n_classes: int = 2) -> "Batch":
        """Build a batch with one-hot targets from integer labels."""
        labels = np.asarray(labels, dtype=np.int64)
        return cls(inputs, np.eye(n_classes)[labels])


@dataclass
class _ForwardCache:
    activations: list[Matrix] = field(default_factory=list)
    pre_activations: list[Matrix] = field(default_factory=list)


def init_params(spec: NetworkSpec, rng: np.random.Generator) -> ParamVector:
    """Glorot-uniform weights in +/- sqrt(6 / (fan_in + fan_out)), zero biases."""
    values = np.zeros(spec.total_param_count)
    for layer in spec.layout:
        limit = np.sqrt(6.0 / (layer.fan_in + layer.fan_out))
        values[layer.weight_offset : layer.bias_offset] = rng.uniform(
            -limit, limit, size=layer.fan_in * layer.fan_out
        )
    return ParamVector(values, spec.head_offset)


def _weights(spec: NetworkSpec, params: ParamVector, index: int) -> tuple[Matrix, Matrix]:
    layer = spec.layout[index]
    w = params.values[layer.weight_offset : layer.bias_offset].reshape(layer.fan_in, layer.fan_out)
    b = params.values[layer.bias_offset : layer.end]
    return w, b


def _softmax(z: Matrix) -> Matrix:
    shifted = z - np.max(z, axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=1, keepdims=True)


def _check_params(spec: NetworkSpec, params: ParamVector):
    if params.head_only or len(params) != spec.total_param_count:
        raise ShapeError(
            f"Parameter vector of size {len(params)} does not match spec ({spec.total_param_count})"
        )


def _forward(spec: NetworkSpec, params: ParamVector, inputs: Matrix, start: int = 0) -> _ForwardCache:
    """Run layers[start:] on `inputs`, caching activations for backprop."""
    _check_params(spec, params)
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    expected = spec.layer_sizes[start]
    if x.shape[1] != expected:
        raise ShapeError(f"Input dim {x.shape[1]} does not match layer input {expected}")
    cache = _ForwardCache(activations=[x])
    for index in range(start, spec.n_layers):
        w, b = _weights(spec, params, index)
        z = cache.activations[-1] @ w + b
        cache.pre_activations.append(z)
        if index < spec.n_layers - 1 or spec.output_activation == "relu":
            cache.activations.append(np.maximum(z, 0.0))
        else:
            cache.activations.append(_softmax(z))
    return cache


def forward(spec: NetworkSpec, params: ParamVector, inputs: Matrix) -> Matrix:
    """
    Network output for a batch of inputs.

    Args:
        spec: Network description
        params: Full parameter vector
        inputs: Matrix of shape (samples, input dim)

    Returns:
        Class probabilities (softmax output) or ReLU features for base-only specs

    Raises:
        ShapeError: If the input or parameter dimensions do not match spec
    """
    return _forward(spec, params, inputs).activations[-1]


def base_features(spec: NetworkSpec, params: ParamVector, inputs: Matrix) -> Matrix:
    """Activations the frozen base hands to the head (inputs if the base is empty)."""
    cache = _forward(spec, params, inputs)
    return cache.activations[spec.head_start]


def head_forward(spec: NetworkSpec, params: ParamVector, features: Matrix) -> Matrix:
    """Run only the head on precomputed base features."""
    return _forward(spec, params, features, start=spec.head_start).activations[-1]


def loss_mse(spec: NetworkSpec, params: ParamVector, batch: Batch) -> float:
    """
    Squared-error loss J = 1/(2m) * sum_i ||h(X_i) - y_i||^2.

    Raises:
        EmptyBatch: If the batch has no samples
    """
    if len(batch) == 0:
        raise EmptyBatch("loss_mse needs at least one sample")
    out = forward(spec, params, batch.inputs)
    _check_targets(out, batch.targets)
    return float(np.sum((out - batch.targets) ** 2) / (2.0 * len(batch)))


def _check_targets(out: Matrix, targets: Matrix):
    if out.shape != targets.shape:
        raise ShapeError(f"Output shape {out.shape} does not match targets {targets.shape}")


def _backprop(
    spec: NetworkSpec,
    params: ParamVector,
    cache: _ForwardCache,
    targets: Matrix,
    start: int,
    stop: int,
) -> npt.NDArray[np.float64]:
    """
    Summed gradient of 1/2 * sum ||out - y||^2 for layers[stop:] of a forward
    pass that began at layer `start`. Returns values for offsets from
    layout[stop].weight_offset to the end.
    """
    out = cache.activations[-1]
    _check_targets(out, targets)
    g = out - targets
    z_last = cache.pre_activations[-1]
    if spec.output_activation == "softmax":
        delta = out * (g - np.sum(g * out, axis=1, keepdims=True))
    else:
        delta = g * (z_last > 0.0)

    first_offset = spec.layout[stop].weight_offset
    grad_values = np.zeros(spec.total_param_count - first_offset)
    for index in range(spec.n_layers - 1, stop - 1, -1):
        local = index - start
        layer = spec.layout[index]
        a_prev = cache.activations[local]
        grad_values[layer.weight_offset - first_offset : layer.bias_offset - first_offset] = (
            a_prev.T @ delta
        ).ravel()
        grad_values[layer.bias_offset - first_offset : layer.end - first_offset] = delta.sum(axis=0)
        if index > stop:
            w, _ = _weights(spec, params, index)
            delta = (delta @ w.T) * (cache.pre_activations[local - 1] > 0.0)
    return grad_values


def grad(spec: NetworkSpec, params: ParamVector, batch: Batch, mean: bool = False) -> ParamVector:
    """
    Analytic gradient of the squared-error loss.

    By default returns the per-party sum over samples (no 1/m factor), which
    the mediator normalizes after aggregation. `mean=True` divides by the
    batch size, giving the gradient of loss_mse for local-only training.

    Raises:
        EmptyBatch: If the batch has no samples
        ShapeError: On dimension mismatch
    """
    if len(batch) == 0:
        raise EmptyBatch("grad needs at least one sample")
    cache = _forward(spec, params, batch.inputs)
    values = _backprop(spec, params, cache, batch.targets, start=0, stop=0)
    if mean:
        values /= len(batch)
    return ParamVector(values, spec.head_offset)


def grad_head(
    spec: NetworkSpec,
    params: ParamVector,
    batch: Batch,
    mean: bool = False,
    features: Optional[Matrix] = None,
) -> ParamVector:
    """
    Gradient restricted to head parameters; the base is never differentiated.

    Args:
        spec: Network description
        params: Full parameter vector
        batch: Samples (inputs are ignored when `features` is given)
        mean: Divide by the batch size
        features: Precomputed base features for the batch rows

    Returns:
        Head-only ParamVector equal to grad(...)'s head slice
    """
    if len(batch) == 0:
        raise EmptyBatch("grad_head needs at least one sample")
    if spec.head_start == spec.n_layers:
        return ParamVector(np.zeros(0), spec.head_offset, head_only=True)
    if features is None:
        features = base_features(spec, params, batch.inputs)
    cache = _forward(spec, params, features, start=spec.head_start)
    values = _backprop(spec, params, cache, batch.targets, start=spec.head_start, stop=spec.head_start)
    if mean:
        values /= len(batch)
    return ParamVector(values, spec.head_offset, head_only=True)


def predict(spec: NetworkSpec, params: ParamVector, inputs: Matrix) -> npt.NDArray[np.int64]:
    """Arg-max class per input row."""
    return np.argmax(forward(spec, params, inputs), axis=1)
