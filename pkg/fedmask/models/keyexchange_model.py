"""
Key Agreement and Mask Stream Model

Finite-field Diffie-Hellman over published safe-prime groups, SHA-256 seed
derivation, and the seed-keyed PRF that expands a shared seed into per-round
ring masks.
"""

import hashlib
import random
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fixed_point_model import RingVector

SEED_BYTES = 32

# Each SHA-256 block yields four 64-bit ring elements.
_ELEMS_PER_BLOCK = 4


def _hex(text: str) -> int:
    return int("".join(text.split()), 16)


# RFC 3526 group 14 (2048-bit MODP)
MODP_2048 = _hex(
    """
    FFFFFFFF FFFFFFFF C90FDAA2 2168C234 C4C6628B 80DC1CD1
    29024E08 8A67CC74 020BBEA6 3B139B22 514A0879 8E3404DD
    EF9519B3 CD3A431B 302B0A6D F25F1437 4FE1356D 6D51C245
    E485B576 625E7EC6 F44C42E9 A637ED6B 0BFF5CB6 F406B7ED
    EE386BFB 5A899FA5 AE9F2411 7C4B1FE6 49286651 ECE45B3D
    C2007CB8 A163BF05 98DA4836 1C55D39A 69163FA8 FD24CF5F
    83655D23 DCA3AD96 1C62F356 208552BB 9ED52907 7096966D
    670C354E 4ABC9804 F1746C08 CA18217C 32905E46 2E36CE3B
    E39E772C 180E8603 9B2783A2 EC07A28F B5C55DF0 6F4C52C9
    DE2BCBF6 95581718 3995497C EA956AE5 15D22618 98FA0510
    15728E5A 8AACAA68 FFFFFFFF FFFFFFFF
    """
)

# RFC 2409 second Oakley group (1024-bit MODP), for fast tests
MODP_1024 = _hex(
    """
    FFFFFFFF FFFFFFFF C90FDAA2 2168C234 C4C6628B 80DC1CD1
    29024E08 8A67CC74 020BBEA6 3B139B22 514A0879 8E3404DD
    EF9519B3 CD3A431B 302B0A6D F25F1437 4FE1356D 6D51C245
    E485B576 625E7EC6 F44C42E9 A637ED6B 0BFF5CB6 F406B7ED
    EE386BFB 5A899FA5 AE9F2411 7C4B1FE6 49286651 ECE65381
    FFFFFFFF FFFFFFFF
    """
)


class InvalidPublicValue(ValueError):
    """Raised when a peer's public value lies in a degenerate subgroup or outside the group."""

    pass  # pylint: disable=unnecessary-pass


@dataclass(frozen=True)
class DhGroup:
    """
    Multiplicative group modulo a safe prime.

    Attributes:
        prime_modulus: Safe prime p
        generator: Group generator g
    """

    prime_modulus: int = MODP_2048
    generator: int = 2

    @property
    def bit_length(self) -> int:
        """Size of the modulus in bits."""
        return self.prime_modulus.bit_length()

    @property
    def byte_length(self) -> int:
        """Size of a big-endian encoded group element."""
        return (self.bit_length + 7) // 8

    def validate(self) -> bool:
        """Check that p is a safe prime and g is a nontrivial element."""
        p = self.prime_modulus
        return (
            is_probable_prime(p)
            and is_probable_prime((p - 1) // 2)
            and 1 < self.generator < p - 1
        )

    @classmethod
    def named(cls, name: str) -> "DhGroup":
        """
        Look up a named group.

        Args:
            name: 'modp2048' (default), 'modp1024', or 'toy23' (p=23, g=5, tests only)
        """
        groups = {
            "modp2048": cls(MODP_2048, 2),
            "modp1024": cls(MODP_1024, 2),
            "toy23": cls(23, 5),
        }
        if name not in groups:
            raise ValueError(f"Unknown DH group '{name}', expected one of {sorted(groups)}")
        return groups[name]


@dataclass(frozen=True)
class SharedSeed:
    """32-byte seed shared by one pair of parties (smaller id first)."""

    value: bytes
    pair: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if len(self.value) != SEED_BYTES:
            raise ValueError(f"Shared seed must be {SEED_BYTES} bytes, got {len(self.value)}")
        a, b = self.pair
        if a > b:
            object.__setattr__(self, "pair", (b, a))


def is_probable_prime(n: int, rounds: int = 32) -> bool:
    """Miller-Rabin test with fixed witnesses derived from a seeded generator."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n & 0xFFFFFFFF)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def dh_public(group: DhGroup, private: int) -> int:
    """Public value g^private mod p."""
    return pow(group.generator, private, group.prime_modulus)


def dh_keypair(group: DhGroup, rng: random.Random) -> tuple[int, int]:
    """
    Draw a DH keypair.

    Args:
        group: DH group
        rng: Seeded random source owned by the caller

    Returns:
        (private exponent in [2, p-2], public value); exponents whose public
        value is p-1 are redrawn since peers reject it

    Examples:
        >>> dh_public(DhGroup.named("toy23"), 6)
        8
    """
    while True:
        private = rng.randint(2, group.prime_modulus - 2)
        public = dh_public(group, private)
        if 1 < public < group.prime_modulus - 1:
            return private, public


def dh_shared_element(private: int, peer_public: int, group: DhGroup) -> int:
    """
    Raw shared group element peer_public^private mod p.

    Raises:
        InvalidPublicValue: If peer_public is 0, 1, p-1 or outside [0, p)
    """
    p = group.prime_modulus
    if peer_public <= 1 or peer_public >= p - 1:
        raise InvalidPublicValue(f"Peer public value {peer_public} rejected for {group.bit_length}-bit group")
    return pow(peer_public, private, p)


def dh_shared(
    private: int,
    peer_public: int,
    group: DhGroup,
    pair: Optional[tuple[int, int]] = None,
) -> SharedSeed:
    """
    Derive the pair's shared seed as SHA-256 of the big-endian shared element.

    Args:
        private: Own private exponent
        peer_public: Peer's public value
        group: DH group
        pair: Party ids owning the seed

    Returns:
        SharedSeed identical on both endpoints

    Raises:
        InvalidPublicValue: For degenerate peer values
    """
    element = dh_shared_element(private, peer_public, group)
    digest = hashlib.sha256(element.to_bytes(group.byte_length, "big")).digest()
    return SharedSeed(digest, pair if pair is not None else (0, 0))


def mask_stream(seed: SharedSeed, round_tag: int, length: int) -> RingVector:
    """
    Expand a shared seed into a deterministic ring mask for one round.

    Block b of the output is SHA-256(seed || round || b) read as four
    little-endian 64-bit words, so element i depends only on
    (seed, round, i // 4).

    Args:
        seed: Pairwise shared seed
        round_tag: Aggregation round (nonnegative)
        length: Number of ring elements

    Returns:
        uint64 vector of the requested length
    """
    if length < 0:
        raise ValueError(f"length must be nonnegative, got {length}")
    if length == 0:
        return np.zeros(0, dtype=np.uint64)
    prefix = hashlib.sha256(seed.value + struct.pack(">Q", round_tag))
    n_blocks = -(-length // _ELEMS_PER_BLOCK)
    chunks = []
    for block in range(n_blocks):
        h = prefix.copy()
        h.update(struct.pack(">Q", block))
        chunks.append(h.digest())
    words = np.frombuffer(b"".join(chunks), dtype="<u8")
    return words[:length].astype(np.uint64)
