"""
Latency Presets

Named latency matrices for 3-, 5- and 10-party deployments spread over
cloud regions. The latencies are synthetic: one-way delay is modeled as a
fixed 2 ms stack cost plus great-circle distance at 100 km per ms, with the
mediator placed in the first region's metro area.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .simnet import LatencyMatrix

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0
KM_PER_MS = 100.0
STACK_DELAY_MS = 2.0

# (name, latitude, longitude)
REGIONS = {
    "us-east": (38.9, -77.0),
    "us-west": (45.6, -122.7),
    "eu-central": (50.1, 8.7),
    "ap-southeast": (1.35, 103.8),
    "sa-east": (-23.5, -46.6),
    "eu-west": (53.3, -6.3),
    "ap-northeast": (35.7, 139.7),
    "ca-central": (45.5, -73.6),
    "ap-south": (19.1, 72.9),
    "me-central": (25.2, 55.3),
    "mediator": (39.0, -77.5),
}

PRESETS = {
    "scenario1": ("us-east", "eu-central", "ap-southeast"),
    "scenario2": ("us-east", "us-west", "eu-central", "ap-southeast", "sa-east"),
    "scenario3": (
        "us-east",
        "us-west",
        "eu-central",
        "ap-southeast",
        "sa-east",
        "eu-west",
        "ap-northeast",
        "ca-central",
        "ap-south",
        "me-central",
    ),
}

# Party count -> preset used by `resolve_latency(..., "auto")`
AUTO_PRESET = {3: "scenario1", 5: "scenario2", 10: "scenario3"}


def _great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    lat1, lon1, lat2, lon2 = map(np.radians, (a[0], a[1], b[0], b[1]))
    h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return float(2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(h)))


def matrix_for_regions(regions: tuple[str, ...]) -> LatencyMatrix:
    """Latency matrix for parties in the given regions plus the mediator node."""
    sites = [REGIONS[r] for r in regions] + [REGIONS["mediator"]]
    size = len(sites)
    lat = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i != j:
                lat[i, j] = STACK_DELAY_MS + _great_circle_km(sites[i], sites[j]) / KM_PER_MS
    return LatencyMatrix(lat)


def preset(name: str) -> LatencyMatrix:
    """
    Named synthetic preset.

    Args:
        name: 'scenario1' (3 parties), 'scenario2' (5) or 'scenario3' (10)

    Raises:
        KeyError: For an unknown preset name
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown latency preset '{name}', expected one of {sorted(PRESETS)}")
    return matrix_for_regions(PRESETS[name])


def resolve_latency(
    source: Union[str, list, Path, None],
    n_parties: int,
    rng: Optional[np.random.Generator] = None,
) -> LatencyMatrix:
    """
    Turn a scenario's latency entry into a matrix for n parties.

    Accepts a preset name, 'auto' (preset by party count, else seeded random),
    'uniform:<ms>', a path to a JSON matrix, or an inline array of arrays.
    """
    if isinstance(source, list):
        matrix = LatencyMatrix.from_json(source)
    elif source is None or source == "auto":
        if n_parties in AUTO_PRESET:
            matrix = preset(AUTO_PRESET[n_parties])
        else:
            logger.info("No preset for %d parties; drawing a random latency matrix", n_parties)
            matrix = LatencyMatrix.random(n_parties, rng if rng is not None else np.random.default_rng(0))
    elif isinstance(source, str) and source in PRESETS:
        matrix = preset(source)
    elif isinstance(source, str) and source.startswith("uniform:"):
        matrix = LatencyMatrix.uniform(n_parties, float(source.split(":", 1)[1]))
    else:
        matrix = LatencyMatrix.from_json(Path(source))
    if matrix.n_parties != n_parties:
        raise ValueError(f"Latency matrix covers {matrix.n_parties} parties, scenario has {n_parties}")
    return matrix
