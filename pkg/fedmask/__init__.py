"""
fedmask: pairwise-masked secure aggregation for two-phase federated learning.

Subpackages:
    models      fixed-point ring, prime field, key agreement, dense network
    sim         discrete-event network simulator and latency matrices
    protocols   masked aggregation and the NOSMC / STSMC / Shamir baselines
    generators  seeded synthetic two-class signal data
    data        partitioning, splits, metrics, dataset CSV files
    federation  init phase, edge phase, personalization, sweeps, checkpoints
    analysis    collusion attacks and protocol conformance
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
