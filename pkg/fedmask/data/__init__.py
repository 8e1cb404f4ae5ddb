"""
Partitioning, splits, metrics and dataset files.
"""

from .partition import PartyData, Shard, TooFewSamples, make_party_data, partition, partition_sizes, split_shard
from .metrics import DegenerateMetric, Metrics, confusion, metrics
from .csv_io import read_dataset_csv, write_dataset_csv

__all__ = [
    "PartyData",
    "Shard",
    "TooFewSamples",
    "make_party_data",
    "partition",
    "partition_sizes",
    "split_shard",
    "DegenerateMetric",
    "Metrics",
    "confusion",
    "metrics",
    "read_dataset_csv",
    "write_dataset_csv",
]
