"""
Unit tests for the dense network model.

Analytic gradients are checked against central finite differences; the
base/head partition bookkeeping is checked on the default network.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.models.network_model import (
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

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


def random_batch(spec: NetworkSpec, rng: np.random.Generator, m: int = 5) -> Batch:
    inputs = rng.normal(size=(m, spec.input_dim))
    labels = rng.integers(0, spec.output_dim, size=m)
    return Batch.from_labels(inputs, labels, spec.output_dim)


def finite_difference(spec: NetworkSpec, params: ParamVector, batch: Batch, eps: float = 1e-6) -> np.ndarray:
    """Central differences of the summed loss m * J."""
    m = len(batch)
    out = np.zeros(len(params))
    for i in range(len(params)):
        up = params.copy()
        down = params.copy()
        up.values[i] += eps
        down.values[i] -= eps
        out[i] = m * (loss_mse(spec, up, batch) - loss_mse(spec, down, batch)) / (2 * eps)
    return out


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12))


class TestNetworkSpec:
    """Test cases for NetworkSpec bookkeeping."""

    def test_default_counts(self):
        """Test parameter counts of the default 32-64-32-2 network."""
        spec = NetworkSpec()
        assert spec.total_param_count == 2112 + 2080 + 66
        assert spec.head_start == 2
        assert spec.head_param_count == 66
        assert spec.head_offset == 4192
        assert spec.head_fraction == pytest.approx(66 / 4258)

    def test_whole_network_head(self):
        """Test head_start_layer 0 makes every parameter trainable."""
        spec = NetworkSpec((32, 64, 32, 2), 0)
        assert spec.head_param_count == spec.total_param_count
        assert spec.head_offset == 0

    def test_empty_head(self):
        """Test head_start_layer n_layers leaves no head."""
        spec = NetworkSpec((32, 64, 32, 2), 3)
        assert spec.head_param_count == 0
        assert spec.base_output_dim == 2

    def test_invalid_specs(self):
        """Test bad layer lists and head starts raise ShapeError."""
        with pytest.raises(ShapeError):
            NetworkSpec((5,))
        with pytest.raises(ShapeError):
            NetworkSpec((5, 0, 2))
        with pytest.raises(ShapeError):
            NetworkSpec((5, 4, 2), 3)
        with pytest.raises(ShapeError):
            NetworkSpec((5, 4, 2), output_activation="tanh")

    def test_base_spec_and_with_base(self):
        """Test splitting off the base and swapping in a smaller one."""
        spec = NetworkSpec()
        base = spec.base_spec()
        assert base.layer_sizes == (32, 64, 32)
        assert base.head_param_count == 0
        swapped = spec.with_base(NetworkSpec((32, 16, 32), 2, "relu"))
        assert swapped.layer_sizes == (32, 16, 32, 2)
        assert swapped.head_start == 2
        with pytest.raises(ShapeError):
            spec.with_base(NetworkSpec((32, 16), 1, "relu"))

    def test_empty_base_has_no_base_spec(self):
        """Test base_spec on a whole-network head."""
        with pytest.raises(ShapeError):
            NetworkSpec((4, 2), 0).base_spec()


class TestParamVector:
    """Test cases for ParamVector."""

    def test_base_and_head_views(self):
        """Test base/head slicing at the head offset."""
        params = ParamVector(np.arange(10.0), 6)
        assert params.base.tolist() == [0, 1, 2, 3, 4, 5]
        assert params.head.tolist() == [6, 7, 8, 9]
        head = params.head_slice()
        assert head.head_only and head.base.size == 0

    def test_with_head(self):
        """Test replacing the head leaves the base and the original untouched."""
        params = ParamVector(np.zeros(5), 3)
        updated = params.with_head([1.0, 2.0])
        assert updated.values.tolist() == [0, 0, 0, 1, 2]
        assert not params.values.any()
        with pytest.raises(ShapeError):
            params.with_head([1.0])

    def test_bytes(self):
        """Test serialization and rejection of foreign data."""
        params = ParamVector(np.linspace(-1, 1, 7), 4)
        restored = ParamVector.from_bytes(params.to_bytes())
        assert np.array_equal(restored.values, params.values)
        assert restored.head_offset == 4
        with pytest.raises(ShapeError):
            ParamVector.from_bytes(b"XXXX" + params.to_bytes()[4:])
        with pytest.raises(ShapeError):
            ParamVector.from_bytes(params.to_bytes()[:-8])


class TestForward:
    """Test cases for forward evaluation."""

    def test_softmax_rows(self, rng):
        """Test classifier outputs are probability rows."""
        spec = NetworkSpec((6, 5, 3))
        out = forward(spec, init_params(spec, rng), rng.normal(size=(4, 6)))
        assert out.shape == (4, 3)
        assert np.allclose(out.sum(axis=1), 1.0)
        assert np.all(out >= 0)

    def test_relu_features(self, rng):
        """Test base-only specs end in nonnegative ReLU features."""
        spec = NetworkSpec((6, 5, 4), 2, "relu")
        out = forward(spec, init_params(spec, rng), rng.normal(size=(3, 6)))
        assert out.shape == (3, 4)
        assert np.all(out >= 0)

    def test_base_features_width(self, rng):
        """Test base features have the head's input width."""
        spec = NetworkSpec((6, 5, 4, 2))
        features = base_features(spec, init_params(spec, rng), rng.normal(size=(3, 6)))
        assert features.shape == (3, spec.base_output_dim)

    def test_input_dim_mismatch(self, rng):
        """Test wrong input widths raise ShapeError."""
        spec = NetworkSpec((6, 5, 2))
        with pytest.raises(ShapeError):
            forward(spec, init_params(spec, rng), np.zeros((2, 7)))

    def test_predict(self, rng):
        """Test predictions are arg-max classes."""
        spec = NetworkSpec((6, 5, 2))
        params = init_params(spec, rng)
        inputs = rng.normal(size=(8, 6))
        assert np.array_equal(predict(spec, params, inputs), np.argmax(forward(spec, params, inputs), axis=1))

    def test_glorot_init(self, rng):
        """Test initial weights stay within the Glorot limit and biases are zero."""
        spec = NetworkSpec((6, 10))
        params = init_params(spec, rng)
        limit = np.sqrt(6.0 / 16)
        assert np.all(np.abs(params.values[:60]) <= limit)
        assert not params.values[60:].any()


class TestGradients:
    """Test cases for analytic gradients."""

    @pytest.mark.parametrize(
        "layers",
        [(4, 3), (5, 4, 2), (4, 6, 5, 3), (3, 4, 4, 2)],
    )
    def test_full_gradient_matches_finite_differences(self, layers):
        """Test grad against central differences of the summed loss."""
        rng = np.random.default_rng(sum(layers))
        spec = NetworkSpec(layers)
        params = init_params(spec, rng)
        batch = random_batch(spec, rng)
        analytic = grad(spec, params, batch).values
        assert relative_error(analytic, finite_difference(spec, params, batch)) <= 1e-4

    def test_mean_gradient(self, rng):
        """Test mean=True divides the summed gradient by the batch size."""
        spec = NetworkSpec((4, 3, 2))
        params = init_params(spec, rng)
        batch = random_batch(spec, rng, m=6)
        assert np.allclose(grad(spec, params, batch, mean=True).values, grad(spec, params, batch).values / 6)

    @pytest.mark.parametrize("head_start", [0, 1, 2])
    def test_head_gradient_is_head_slice(self, head_start, rng):
        """Test grad_head equals the head slice of the full gradient."""
        spec = NetworkSpec((5, 4, 3, 2), head_start)
        params = init_params(spec, rng)
        batch = random_batch(spec, rng)
        full = grad(spec, params, batch)
        head = grad_head(spec, params, batch)
        assert head.head_only
        assert np.allclose(head.values, full.head)

    def test_head_gradient_from_features(self, rng):
        """Test precomputed base features give the same head gradient."""
        spec = NetworkSpec((5, 4, 3, 2))
        params = init_params(spec, rng)
        batch = random_batch(spec, rng)
        features = base_features(spec, params, batch.inputs)
        assert np.allclose(
            grad_head(spec, params, batch, features=features).values,
            grad_head(spec, params, batch).values,
        )

    def test_empty_head_gradient(self, rng):
        """Test a network without head has an empty head gradient."""
        spec = NetworkSpec((5, 4, 2), 2)
        params = init_params(spec, rng)
        assert len(grad_head(spec, params, random_batch(spec, rng))) == 0

    def test_empty_batch(self, rng):
        """Test gradients and loss need at least one sample."""
        spec = NetworkSpec((4, 2))
        params = init_params(spec, rng)
        empty = Batch(np.zeros((0, 4)), np.zeros((0, 2)))
        with pytest.raises(EmptyBatch):
            grad(spec, params, empty)
        with pytest.raises(EmptyBatch):
            grad_head(spec, params, empty)
        with pytest.raises(EmptyBatch):
            loss_mse(spec, params, empty)

    def test_loss_value(self):
        """Test J = 1/(2m) sum ||h(x) - y||^2 on a hand-checked case."""
        spec = NetworkSpec((1, 2))
        params = ParamVector(np.zeros(4), 0)
        batch = Batch.from_labels(np.zeros((2, 1)), [0, 1])
        # uniform softmax output 0.5/0.5 against one-hot targets: 0.5 per sample
        assert loss_mse(spec, params, batch) == pytest.approx(0.25)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
