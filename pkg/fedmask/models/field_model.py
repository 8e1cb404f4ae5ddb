"""
Prime Field Model over GF(2^61 - 1)

Scalar operations work on Python ints; the vector variants work on numpy
uint64 arrays and use the Mersenne structure of the modulus to keep every
intermediate product inside 64 bits. Shamir shares are carried here.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .fixed_point_model import RING_MODULUS, RingVector

FIELD_PRIME = (1 << 61) - 1

# Ring values are shifted by this offset before entering the field so that
# embedded secrets are nonnegative.
EMBED_OFFSET = 1 << 60

FieldVector = npt.NDArray[np.uint64]

_P = np.uint64(FIELD_PRIME)
_LOW32 = np.uint64(0xFFFFFFFF)
_LOW29 = np.uint64((1 << 29) - 1)


class FieldOverflowError(ValueError):
    """Raised when a ring value cannot be embedded into the field."""

    pass  # pylint: disable=unnecessary-pass


@dataclass(frozen=True)
class FieldElement:
    """Element of GF(2^61 - 1) with operator support."""

    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % FIELD_PRIME)

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(add(self.value, other.value))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(sub(self.value, other.value))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(mul(self.value, other.value))

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse (ZeroDivisionError for zero)."""
        return FieldElement(inv(self.value))


# Scalar arithmetic


def add(a: int, b: int) -> int:
    """(a + b) mod p."""
    return (a + b) % FIELD_PRIME


def sub(a: int, b: int) -> int:
    """(a - b) mod p."""
    return (a - b) % FIELD_PRIME


def mul(a: int, b: int) -> int:
    """(a * b) mod p."""
    return (a * b) % FIELD_PRIME


def inv(a: int) -> int:
    """
    Multiplicative inverse via Fermat's little theorem.

    Raises:
        ZeroDivisionError: If a is zero modulo p
    """
    if a % FIELD_PRIME == 0:
        raise ZeroDivisionError("Cannot invert zero in GF(2^61 - 1)")
    return pow(a, FIELD_PRIME - 2, FIELD_PRIME)


def eval_poly(coeffs: Sequence[int], x: int) -> int:
    """
    Evaluate a polynomial at x with Horner's rule.

    Args:
        coeffs: Coefficients lowest degree first (coeffs[0] is the constant term)
        x: Evaluation point

    Examples:
        >>> eval_poly([3, 2], 2)   # 3 + 2x at x = 2
        7
    """
    result = 0
    for c in reversed(coeffs):
        result = (result * x + c) % FIELD_PRIME
    return result


def lagrange_weights_at_zero(xs: Sequence[int]) -> list[int]:
    """Lagrange basis coefficients L_i(0) for the given distinct x-coordinates."""
    if len(set(x % FIELD_PRIME for x in xs)) != len(xs):
        raise ValueError(f"Interpolation points must be distinct, got {list(xs)}")
    weights = []
    for i, xi in enumerate(xs):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            num = mul(num, sub(0, xj))
            den = mul(den, sub(xi, xj))
        weights.append(mul(num, inv(den)))
    return weights


def interpolate(points: Sequence[tuple[int, int]]) -> int:
    """
    Lagrange interpolation evaluated at x = 0.

    Args:
        points: (x, y) pairs with distinct x

    Returns:
        f(0) of the unique polynomial of degree < len(points) through the points

    Examples:
        >>> interpolate([(1, 5), (2, 7)])   # f(x) = 3 + 2x
        3
    """
    xs = [x for x, _ in points]
    weights = lagrange_weights_at_zero(xs)
    total = 0
    for w, (_, y) in zip(weights, points):
        total = add(total, mul(w, y % FIELD_PRIME))
    return total


# Vector arithmetic on uint64 arrays (all inputs already reduced below p)


def _reduce(x: npt.NDArray[np.uint64]) -> npt.NDArray[np.uint64]:
    """Reduce values below 2^64 modulo p using 2^61 = 1 (mod p)."""
    r = (x >> np.uint64(61)) + (x & _P)
    return np.where(r >= _P, r - _P, r).astype(np.uint64)


def vec_add(a: FieldVector, b: FieldVector) -> FieldVector:
    """Element-wise (a + b) mod p."""
    s = np.add(a, b, dtype=np.uint64)
    return np.where(s >= _P, s - _P, s).astype(np.uint64)


def vec_sub(a: FieldVector, b: FieldVector) -> FieldVector:
    """Element-wise (a - b) mod p."""
    return vec_add(a, np.subtract(_P, b, dtype=np.uint64) % _P)


def vec_mul(a: FieldVector, b: npt.ArrayLike) -> FieldVector:
    """
    Element-wise (a * b) mod p without leaving 64-bit arithmetic.

    Splits each operand into 32-bit halves; with 2^61 = 1 (mod p) the four
    partial products fold back below 2^63 before the final reduction.
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a_lo = a & _LOW32
    a_hi = a >> np.uint64(32)
    b_lo = b & _LOW32
    b_hi = b >> np.uint64(32)

    ll = a_lo * b_lo
    mid = a_lo * b_hi + a_hi * b_lo
    hh = a_hi * b_hi

    # 2^64 = 8 (mod p); mid * 2^32 = (mid >> 29) * 2^61 + (mid & (2^29 - 1)) * 2^32
    total = (
        (hh << np.uint64(3))
        + (mid >> np.uint64(29))
        + ((mid & _LOW29) << np.uint64(32))
        + (ll >> np.uint64(61))
        + (ll & _P)
    )
    return _reduce(total)


def vec_eval_poly(coeffs: FieldVector, x: int) -> FieldVector:
    """
    Evaluate one polynomial per column at the same point x.

    Args:
        coeffs: Array of shape (degree + 1, length), lowest degree first
        x: Evaluation point

    Returns:
        Vector of length `length` with f_col(x) per column
    """
    xv = np.uint64(x % FIELD_PRIME)
    result = np.zeros(coeffs.shape[1], dtype=np.uint64)
    for c in coeffs[::-1]:
        result = vec_add(vec_mul(result, xv), c)
    return result


def vec_interpolate(xs: Sequence[int], ys: Sequence[FieldVector]) -> FieldVector:
    """Interpolate at x = 0 column-wise from share vectors at the given points."""
    weights = lagrange_weights_at_zero(xs)
    total = np.zeros(len(ys[0]), dtype=np.uint64)
    for w, y in zip(weights, ys):
        total = vec_add(total, vec_mul(y, np.uint64(w)))
    return total


def random_field_vector(rng: np.random.Generator, shape) -> FieldVector:
    """Uniform field elements drawn from an explicit generator."""
    return rng.integers(0, FIELD_PRIME, size=shape, dtype=np.uint64)


# Ring <-> field embedding


def embed_ring(ring: RingVector) -> FieldVector:
    """
    Map signed ring values into the field with the +2^60 offset.

    Raises:
        FieldOverflowError: If any signed value has magnitude >= 2^60
    """
    signed = np.asarray(ring, dtype=np.uint64).view(np.int64)
    if np.any(np.abs(signed.astype(np.float64)) >= float(EMBED_OFFSET)):
        raise FieldOverflowError("Ring value outside +/-2^60 cannot be embedded in the field")
    shifted = (signed + np.int64(EMBED_OFFSET)).astype(np.uint64)
    return np.where(shifted >= _P, shifted - _P, shifted).astype(np.uint64)


def extract_ring(field_sum: FieldVector, count: int) -> RingVector:
    """
    Undo the embedding offset of a sum of `count` embedded values.

    The field result is read as a signed value in (-p/2, p/2] and written back
    as a two's-complement ring element.
    """
    offset = np.uint64((count * EMBED_OFFSET) % FIELD_PRIME)
    centered = vec_sub(np.asarray(field_sum, dtype=np.uint64), np.full(len(field_sum), offset, dtype=np.uint64))
    half = np.uint64(FIELD_PRIME // 2)
    signed = np.where(
        centered > half,
        centered.astype(np.int64) - np.int64(FIELD_PRIME),
        centered.astype(np.int64),
    )
    return signed.view(np.uint64)


def embed_int(value: int) -> int:
    """Scalar variant of embed_ring for a single ring element."""
    signed = value - RING_MODULUS if value >= RING_MODULUS // 2 else value
    if abs(signed) >= EMBED_OFFSET:
        raise FieldOverflowError(f"Ring value {value} outside +/-2^60")
    return (signed + EMBED_OFFSET) % FIELD_PRIME
