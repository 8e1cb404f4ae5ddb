"""
Unit tests for the fixed-point ring model.

Covers quantization, clamping and the wrap-around ring arithmetic that
mask cancellation relies on.
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedmask.models.fixed_point_model import (
    RING_MODULUS,
    FixedPointCodec,
    as_ring,
    random_ring_vector,
    ring_add,
    ring_neg,
    ring_sub,
    ring_sum,
    ring_zeros,
)

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

int64s = st.integers(min_value=-(1 << 63), max_value=(1 << 63) - 1)


class TestFixedPointCodec:
    """Test cases for FixedPointCodec."""

    def test_quantize_one(self):
        """Test 1.0 maps to 2^20."""
        assert FixedPointCodec().quantize(1.0) == 1048576

    def test_quantize_negative_is_twos_complement(self):
        """Test negative values wrap to the top of the ring."""
        assert FixedPointCodec().quantize(-1.0) == RING_MODULUS - 1048576

    def test_dequantize_signed(self):
        """Test ring elements above 2^63 read as negative."""
        codec = FixedPointCodec()
        assert codec.dequantize(RING_MODULUS - 1048576) == -1.0
        assert codec.dequantize(3 * 1048576) == 3.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=-1024.0, max_value=1024.0, allow_nan=False))
    def test_round_trip_error(self, x):
        """Test dequantize(quantize(x)) is within half a step of x."""
        codec = FixedPointCodec()
        assert abs(codec.dequantize(codec.quantize(x)) - x) <= 2.0**-21

    def test_clamps_outliers(self, caplog):
        """Test values beyond the clamp range saturate and log a warning."""
        codec = FixedPointCodec()
        with caplog.at_level(logging.WARNING):
            ring = codec.quantize_vector([5000.0, -5000.0, 1.0])
        assert codec.dequantize_vector(ring).tolist() == [1024.0, -1024.0, 1.0]
        assert "Clamped 2 of 3" in caplog.text

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_rejects_non_finite(self, bad):
        """Test NaN and infinities are refused instead of encoded."""
        with pytest.raises(ValueError, match="non-finite"):
            FixedPointCodec().quantize_vector([0.5, bad])

    def test_sum_of_quantized_values(self):
        """Test the ring sum of quantized values dequantizes to the real sum."""
        codec = FixedPointCodec()
        values = [0.25, -3.5, 7.125, -0.875]
        total = ring_sum([codec.quantize_vector([v]) for v in values])
        assert codec.dequantize_vector(total)[0] == pytest.approx(sum(values))

    def test_custom_precision(self):
        """Test a codec with 8 fractional bits."""
        codec = FixedPointCodec(frac_bits=8)
        assert codec.quantize(1.0) == 256
        assert codec.resolution == 1.0 / 256

    def test_invalid_parameters(self):
        """Test frac_bits and clamp_range validation."""
        with pytest.raises(ValueError):
            FixedPointCodec(frac_bits=0)
        with pytest.raises(ValueError):
            FixedPointCodec(frac_bits=40)
        with pytest.raises(ValueError):
            FixedPointCodec(clamp_range=0.0)


class TestRingArithmetic:
    """Test cases for ring operations."""

    def test_add_wraps(self):
        """Test (2^64 - 1) + 1 wraps to 0."""
        assert ring_add(as_ring([-1]), as_ring([1])).tolist() == [0]

    def test_sub_wraps(self):
        """Test 0 - 1 wraps to 2^64 - 1."""
        assert int(ring_sub(ring_zeros(1), as_ring([1]))[0]) == RING_MODULUS - 1

    def test_neg(self):
        """Test a + (-a) is zero."""
        a = as_ring([5, -7, 0])
        assert not ring_add(a, ring_neg(a)).any()

    def test_sum_needs_vectors(self):
        """Test ring_sum rejects an empty list."""
        with pytest.raises(ValueError):
            ring_sum([])

    def test_as_ring_python_ints(self):
        """Test arbitrary Python ints are reduced mod 2^64."""
        ring = as_ring(np.array([RING_MODULUS + 3, -1], dtype=object))
        assert [int(v) for v in ring] == [3, RING_MODULUS - 1]

    def test_random_vector_is_seeded(self):
        """Test random ring vectors repeat for the same generator seed."""
        a = random_ring_vector(np.random.default_rng(9), 16)
        b = random_ring_vector(np.random.default_rng(9), 16)
        assert a.dtype == np.uint64
        assert np.array_equal(a, b)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(int64s, min_size=1, max_size=8), st.lists(int64s, min_size=1, max_size=8))
    def test_mask_cancels(self, secret_a, secret_b):
        """Test a mask added by one vector and subtracted by another cancels exactly."""
        length = min(len(secret_a), len(secret_b))
        a = as_ring(np.array(secret_a[:length], dtype=np.int64))
        b = as_ring(np.array(secret_b[:length], dtype=np.int64))
        mask = random_ring_vector(np.random.default_rng(length), length)
        masked = ring_sum([ring_add(a, mask), ring_sub(b, mask)])
        assert np.array_equal(masked, ring_add(a, b))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(int64s, min_size=3, max_size=3))
    def test_add_is_associative_and_commutative(self, values):
        """Test the ring laws hold under wrap-around."""
        a, b, c = (as_ring(np.array([v], dtype=np.int64)) for v in values)
        assert np.array_equal(ring_add(ring_add(a, b), c), ring_add(a, ring_add(b, c)))
        assert np.array_equal(ring_add(a, b), ring_add(b, a))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
