"""
Unit tests for Diffie-Hellman key agreement and the mask stream PRF.
"""

import random
import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.models.keyexchange_model import (
    MODP_1024,
    DhGroup,
    InvalidPublicValue,
    SharedSeed,
    dh_keypair,
    dh_public,
    dh_shared,
    is_probable_prime,
    mask_stream,
)

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


class TestDhGroup:
    """Test cases for DH groups."""

    def test_named_groups(self):
        """Test group lookup by name."""
        assert DhGroup.named("toy23") == DhGroup(23, 5)
        assert DhGroup.named("modp1024").prime_modulus == MODP_1024
        assert DhGroup.named("modp2048").bit_length == 2048

    def test_unknown_group(self):
        """Test unknown names are rejected."""
        with pytest.raises(ValueError):
            DhGroup.named("modp4096")

    def test_safe_primes(self):
        """Test the groups use safe primes."""
        assert DhGroup.named("toy23").validate()
        assert DhGroup.named("modp1024").validate()
        assert not DhGroup(21, 2).validate()

    def test_primality(self):
        """Test the Miller-Rabin check on small values."""
        assert [n for n in range(30) if is_probable_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        assert not is_probable_prime(561)


class TestKeyAgreement:
    """Test cases for keypairs and shared seeds."""

    def test_public_value(self):
        """Test g^x mod p on the toy group."""
        assert dh_public(DhGroup.named("toy23"), 6) == 8

    def test_both_sides_agree(self, fast_group):
        """Test both endpoints derive the same 32-byte seed."""
        rng = random.Random(7)
        priv_a, pub_a = dh_keypair(fast_group, rng)
        priv_b, pub_b = dh_keypair(fast_group, rng)
        seed_a = dh_shared(priv_a, pub_b, fast_group, pair=(0, 1))
        seed_b = dh_shared(priv_b, pub_a, fast_group, pair=(1, 0))
        assert seed_a == seed_b
        assert len(seed_a.value) == 32

    def test_keypairs_avoid_degenerate_publics(self):
        """Test drawn public values are never 0, 1 or p - 1."""
        group = DhGroup.named("toy23")
        rng = random.Random(0)
        for _ in range(200):
            _, public = dh_keypair(group, rng)
            assert 1 < public < group.prime_modulus - 1

    @pytest.mark.parametrize("bad", [0, 1, 22, 23, 100])
    def test_rejects_degenerate_peer(self, bad):
        """Test degenerate or out-of-range peer values raise InvalidPublicValue."""
        with pytest.raises(InvalidPublicValue):
            dh_shared(3, bad, DhGroup.named("toy23"))

    def test_seed_validation(self):
        """Test seed length checking and pair ordering."""
        with pytest.raises(ValueError):
            SharedSeed(b"short")
        assert SharedSeed(bytes(32), (5, 2)).pair == (2, 5)


class TestMaskStream:
    """Test cases for the mask PRF."""

    seed = SharedSeed(bytes(range(32)), (0, 1))

    def test_deterministic(self):
        """Test the same seed, round and length give the same mask."""
        assert np.array_equal(mask_stream(self.seed, 3, 50), mask_stream(self.seed, 3, 50))

    def test_rounds_differ(self):
        """Test distinct round tags give unrelated masks."""
        assert not np.array_equal(mask_stream(self.seed, 0, 8), mask_stream(self.seed, 1, 8))

    def test_seeds_differ(self):
        """Test distinct seeds give unrelated masks."""
        other = SharedSeed(bytes(32), (0, 1))
        assert not np.array_equal(mask_stream(self.seed, 0, 8), mask_stream(other, 0, 8))

    def test_prefix_stable(self):
        """Test element i depends only on its block, not on the requested length."""
        assert np.array_equal(mask_stream(self.seed, 2, 10)[:5], mask_stream(self.seed, 2, 5))

    def test_lengths(self):
        """Test zero and negative lengths."""
        assert mask_stream(self.seed, 0, 0).size == 0
        assert mask_stream(self.seed, 0, 7).dtype == np.uint64
        with pytest.raises(ValueError):
            mask_stream(self.seed, 0, -1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
