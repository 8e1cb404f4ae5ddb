"""
Shared fixtures: a small network, small party datasets and networks.
"""

import numpy as np
import pytest

from fedmask.data.partition import make_party_data
from fedmask.federation.runtime import FedConfig
from fedmask.models.keyexchange_model import DhGroup
from fedmask.models.network_model import NetworkSpec
from fedmask.sim.simnet import LatencyMatrix, SimNet

SMALL_DIM = 8


@pytest.fixture
def small_spec():
    """Three-layer network sized for fast training tests."""
    return NetworkSpec((SMALL_DIM, 6, 4, 2))


@pytest.fixture
def small_parties():
    """Three parties with 30 generated samples each."""
    return make_party_data(3, 30, seed=5, dim=SMALL_DIM)


@pytest.fixture
def fast_group():
    """1024-bit DH group, enough for tests and quicker than the default."""
    return DhGroup.named("modp1024")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def uniform_net(n_parties: int, ms: float = 5.0, processing_delay: float = 0.0) -> SimNet:
    return SimNet(LatencyMatrix.uniform(n_parties, ms), processing_delay)


def small_config(**overrides) -> FedConfig:
    values = {"rounds": 3, "batch_size": 4, "alpha": 1e-2, "k": 2}
    values.update(overrides)
    return FedConfig(**values)
