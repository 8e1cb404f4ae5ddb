"""
Fixed-Point Ring Model

Encodes reals into the 2^64 wrap-around integer ring so that masks cancel bit
exactly. Ring vectors are numpy uint64 arrays; numpy's unsigned arithmetic
already wraps modulo 2^64, which is the ring addition we need.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

RING_BITS = 64
RING_MODULUS = 1 << RING_BITS

RingVector = npt.NDArray[np.uint64]


@dataclass(frozen=True)
class FixedPointCodec:
    """
    Two's-complement fixed-point codec over the 64-bit ring.

    Attributes:
        frac_bits: Number of fractional bits (default 20)
        clamp_range: Largest representable magnitude before clamping (default 2^10)
    """

    frac_bits: int = 20
    clamp_range: float = float(1 << 10)

    def __post_init__(self):
        if not 0 < self.frac_bits < 40:
            raise ValueError(f"frac_bits must be in (0, 40), got {self.frac_bits}")
        if self.clamp_range <= 0:
            raise ValueError(f"clamp_range must be positive, got {self.clamp_range}")

    @property
    def scale(self) -> float:
        """Multiplier between reals and ring integers (2^frac_bits)."""
        return float(1 << self.frac_bits)

    @property
    def resolution(self) -> float:
        """Smallest representable step, 2^-frac_bits."""
        return 1.0 / self.scale

    def quantize(self, x: float) -> int:
        """
        Quantize one real into a ring element.

        Args:
            x: Real value (clamped to +/- clamp_range)

        Returns:
            Ring element in [0, 2^64)

        Examples:
            >>> FixedPointCodec().quantize(1.0)
            1048576
            >>> FixedPointCodec().quantize(-1.0) == 2**64 - 1048576
            True
        """
        return int(self.quantize_vector(np.asarray([x], dtype=np.float64))[0])

    def dequantize(self, e: int) -> float:
        """
        Interpret a ring element as signed two's-complement and rescale.

        Args:
            e: Ring element (aggregates of several quantized values allowed)

        Returns:
            Real value e / 2^frac_bits
        """
        return float(self.dequantize_vector(np.asarray([e % RING_MODULUS], dtype=np.uint64))[0])

    def quantize_vector(self, values: npt.ArrayLike) -> RingVector:
        """
        Quantize a real vector element-wise, clamping outliers.

        Raises:
            ValueError: If any value is NaN or infinite
        """
        x = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise ValueError(f"Cannot quantize {int(np.count_nonzero(~np.isfinite(x)))} non-finite values")
        over = np.abs(x) > self.clamp_range
        if np.any(over):
            logger.warning(
                "Clamped %d of %d values to +/-%g (max |x| = %g)",
                int(np.count_nonzero(over)),
                x.size,
                self.clamp_range,
                float(np.max(np.abs(x))),
            )
            x = np.clip(x, -self.clamp_range, self.clamp_range)
        return np.rint(x * self.scale).astype(np.int64).view(np.uint64)

    def dequantize_vector(self, ring: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Dequantize a ring vector element-wise."""
        r = np.asarray(ring, dtype=np.uint64)
        return r.view(np.int64).astype(np.float64) / self.scale


def ring_add(a: RingVector, b: RingVector) -> RingVector:
    """Element-wise (a + b) mod 2^64."""
    return np.add(a, b, dtype=np.uint64)


def ring_sub(a: RingVector, b: RingVector) -> RingVector:
    """Element-wise (a - b) mod 2^64."""
    return np.subtract(a, b, dtype=np.uint64)


def ring_neg(a: RingVector) -> RingVector:
    """Element-wise additive inverse mod 2^64."""
    return np.subtract(np.uint64(0), a, dtype=np.uint64)


def ring_zeros(length: int) -> RingVector:
    """All-zero ring vector."""
    return np.zeros(length, dtype=np.uint64)


def ring_sum(vectors: list[RingVector]) -> RingVector:
    """Direct element-wise ring sum, the oracle every protocol must match."""
    if not vectors:
        raise ValueError("ring_sum needs at least one vector")
    total = ring_zeros(len(vectors[0]))
    for v in vectors:
        total = ring_add(total, v)
    return total


def as_ring(values: Union[npt.ArrayLike, RingVector]) -> RingVector:
    """Coerce Python ints or arrays into a uint64 ring vector (mod 2^64)."""
    arr = np.asarray(values)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype == object:
        return np.array([int(v) % RING_MODULUS for v in arr.ravel()], dtype=np.uint64)
    return arr.astype(np.int64).view(np.uint64)


def random_ring_vector(rng: np.random.Generator, length: int) -> RingVector:
    """Uniform ring vector drawn from an explicit generator."""
    return np.frombuffer(rng.bytes(8 * length), dtype="<u8").astype(np.uint64)
