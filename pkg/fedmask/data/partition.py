"""
Horizontal Partitioning and Splits

Assigns disjoint sample index sets to parties and splits each party's shard
into train/validation/test parts.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from ..generators.signal_gen import Dataset, GeneratorConfig, generate

logger = logging.getLogger(__name__)

SPLIT_FRACTIONS = (0.6, 0.2, 0.2)

Indices = npt.NDArray[np.int64]


def round_half_up(x: float) -> int:
    """Nearest integer with halves rounded up (2.5 -> 3); tolerates float noise like 1.4999999999999998."""
    return int(np.floor(x + 0.5 + 1e-9))


class TooFewSamples(ValueError):
    """Raised when a dataset cannot give every party at least one sample."""

    pass  # pylint: disable=unnecessary-pass


@dataclass
class Shard:
    """Disjoint train/val/test index lists of one party."""

    party_id: int
    train: Indices
    val: Indices
    test: Indices

    def __len__(self) -> int:
        return int(self.train.size + self.val.size + self.test.size)

    def all_indices(self) -> Indices:
        return np.concatenate([self.train, self.val, self.test])


def partition_sizes(m: int, n_parties: int, mode: str = "equal", weights: Optional[Sequence[float]] = None) -> list[int]:
    """
    Shard sizes: w_j * m rounded half up for all but the last party, which takes the remainder.

    Raises:
        TooFewSamples: If n_parties > m
        ValueError: On an unknown mode or weights that do not sum to 1
    """
    if n_parties < 1:
        raise ValueError(f"n_parties must be >= 1, got {n_parties}")
    if n_parties > m:
        raise TooFewSamples(f"{n_parties} parties cannot share {m} samples")
    if mode == "equal":
        w = np.full(n_parties, 1.0 / n_parties)
    elif mode == "weighted":
        if weights is None or len(weights) != n_parties:
            raise ValueError(f"weighted mode needs {n_parties} weights")
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights must be nonnegative and sum to 1, got {list(weights)}")
    else:
        raise ValueError(f"Unknown partition mode '{mode}', expected 'equal' or 'weighted'")
    sizes = [round_half_up(wj * m) for wj in w[:-1]]
    sizes.append(m - sum(sizes))
    if min(sizes) < 1:
        raise TooFewSamples(f"Partition sizes {sizes} leave a party without samples")
    return sizes


def partition(
    m: int,
    n_parties: int,
    mode: str = "equal",
    weights: Optional[Sequence[float]] = None,
    rng: Optional[np.random.Generator] = None,
) -> list[Indices]:
    """
    Split indices 0..m-1 into disjoint per-party index arrays.

    Args:
        m: Number of samples
        n_parties: Number of parties
        mode: 'equal' or 'weighted'
        weights: Party weights for 'weighted' mode (sum to 1)
        rng: Shuffle indices before cutting when given

    Examples:
        >>> [len(p) for p in partition(100, 3, "weighted", (0.5, 0.3, 0.2))]
        [50, 30, 20]
    """
    sizes = partition_sizes(m, n_parties, mode, weights)
    order = rng.permutation(m) if rng is not None else np.arange(m)
    cuts = np.cumsum(sizes)[:-1]
    return [np.asarray(part, dtype=np.int64) for part in np.split(order, cuts)]


def split_shard(party_id: int, indices: npt.ArrayLike, rng: np.random.Generator, fractions: Sequence[float] = SPLIT_FRACTIONS) -> Shard:
    """Shuffle a party's indices and cut them 60/20/20 (by default)."""
    idx = rng.permutation(np.asarray(indices, dtype=np.int64))
    m = idx.size
    n_train = round_half_up(fractions[0] * m)
    n_val = round_half_up(fractions[1] * m)
    return Shard(party_id, idx[:n_train], idx[n_train : n_train + n_val], idx[n_train + n_val :])


@dataclass
class PartyData:
    """A party's generated dataset and its split."""

    dataset: Dataset
    shard: Shard

    @property
    def party_id(self) -> int:
        return self.shard.party_id

    def part(self, name: str) -> Dataset:
        """'train', 'val' or 'test' subset of the dataset."""
        return self.dataset.subset(getattr(self.shard, name))


def make_party_data(
    n_parties: int,
    samples_per_party: int,
    seed: int = 0,
    dim: int = 32,
    heterogeneity: float = 0.0,
    mode: str = "equal",
    weights: Optional[Sequence[float]] = None,
    config: Optional[GeneratorConfig] = None,
) -> list[PartyData]:
    """
    Generate each party's data locally and split it.

    The total n_parties * samples_per_party is divided per `partition_sizes`;
    each party then generates its share with its own (seed, party id) stream.
    """
    sizes = partition_sizes(n_parties * samples_per_party, n_parties, mode, weights)
    parties = []
    for party_id, size in enumerate(sizes):
        data = generate(size, dim, seed, heterogeneity, party_id, config)
        shard = split_shard(party_id, np.arange(size), np.random.default_rng([seed, party_id, 2]))
        parties.append(PartyData(data, shard))
    logger.info("Generated %d party datasets (sizes %s, heterogeneity %.2f)", n_parties, sizes, heterogeneity)
    return parties
