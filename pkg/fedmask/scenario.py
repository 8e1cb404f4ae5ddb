"""
Scenario Files

A scenario is a JSON document describing one experiment:

    {
      "parties": 3,
      "k": 2,
      "protocol": "masked",
      "model": {"layer_sizes": [32, 64, 32, 2], "head_start_layer": 2},
      "fed": {"rounds": 50, "alpha": 0.001, "batch_size": 16},
      "data": {"samples_per_party": 200, "heterogeneity": 0.0},
      "latency": "auto",
      "seed": 0,
      "distill": {"student_layer_sizes": [32, 16, 32]}
    }

Every section is optional. Unknown keys anywhere are rejected.
"""

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np

from .data.partition import PartyData, make_party_data
from .federation.runtime import FedConfig
from .generators.signal_gen import GeneratorConfig
from .models.network_model import NetworkSpec, ShapeError
from .sim.latency_presets import resolve_latency
from .sim.simnet import LatencyMatrix

logger = logging.getLogger(__name__)

SEED_ENV = "FEDMASK_SEED"

TOP_LEVEL_KEYS = ("parties", "k", "protocol", "model", "fed", "data", "latency", "seed", "distill", "processing_delay")
MODEL_KEYS = ("layer_sizes", "head_start_layer")
DATA_KEYS = ("samples_per_party", "heterogeneity", "partition", "weights")
DISTILL_KEYS = ("student_layer_sizes", "epochs", "alpha", "transfer_samples")


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario files."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


@dataclass
class DataConfig:
    """How party data is generated and divided."""

    samples_per_party: int = 200
    heterogeneity: float = 0.0
    partition: str = "equal"
    weights: Optional[tuple[float, ...]] = None
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)


@dataclass
class DistillConfig:
    """Student base used by edge training with distillation."""

    student_layer_sizes: tuple[int, ...] = (32, 16, 32)
    epochs: int = 50
    alpha: float = 1e-3
    transfer_samples: int = 600


@dataclass
class Scenario:
    """A validated scenario file."""

    parties: int = 3
    model: NetworkSpec = field(default_factory=NetworkSpec)
    fed: FedConfig = field(default_factory=FedConfig)
    data: DataConfig = field(default_factory=DataConfig)
    latency: Union[str, list, None] = "auto"
    seed: Optional[int] = None
    distill: DistillConfig = field(default_factory=DistillConfig)
    processing_delay: float = 0.0

    def party_data(self, seed: int) -> list[PartyData]:
        """Generate every party's dataset with the scenario's data settings."""
        return make_party_data(
            self.parties,
            self.data.samples_per_party,
            seed,
            self.model.input_dim,
            self.data.heterogeneity,
            self.data.partition,
            self.data.weights,
            self.data.generator,
        )

    def latency_matrix(self, seed: int) -> LatencyMatrix:
        return resolve_latency(self.latency, self.parties, np.random.default_rng([seed, 31]))


def _check_keys(section: Any, allowed, path: str):
    if not isinstance(section, Mapping):
        raise ScenarioError(f"'{path}' must be an object")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ScenarioError(f"Unknown key '{path}.{unknown[0]}'" if path else f"Unknown key '{unknown[0]}'")


def _tuples(values: Mapping[str, Any]) -> dict[str, Any]:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}


def parse_scenario(doc: Any) -> Scenario:
    """
    Validate a decoded scenario document.

    Raises:
        ScenarioError: On unknown keys, wrong types or invalid values
    """
    _check_keys(doc, TOP_LEVEL_KEYS, "")
    try:
        model_doc = doc.get("model", {})
        _check_keys(model_doc, MODEL_KEYS, "model")
        model = NetworkSpec(tuple(model_doc.get("layer_sizes", (32, 64, 32, 2))), model_doc.get("head_start_layer"))

        fed_doc = doc.get("fed", {})
        fed_fields = {f.name for f in dataclasses.fields(FedConfig)}
        _check_keys(fed_doc, fed_fields - {"k", "protocol"}, "fed")
        fed = FedConfig(
            **fed_doc,
            k=doc.get("k", FedConfig.k),
            protocol=doc.get("protocol", FedConfig.protocol),
        )

        data_doc = doc.get("data", {})
        generator_fields = {f.name for f in dataclasses.fields(GeneratorConfig)}
        _check_keys(data_doc, set(DATA_KEYS) | generator_fields, "data")
        generator = GeneratorConfig(**_tuples({k: v for k, v in data_doc.items() if k in generator_fields}))
        weights = data_doc.get("weights")
        data = DataConfig(
            samples_per_party=int(data_doc.get("samples_per_party", 200)),
            heterogeneity=float(data_doc.get("heterogeneity", 0.0)),
            partition=data_doc.get("partition", "equal"),
            weights=tuple(weights) if weights is not None else None,
            generator=generator,
        )

        distill_doc = doc.get("distill", {})
        _check_keys(distill_doc, DISTILL_KEYS, "distill")
        distill = DistillConfig(**_tuples(distill_doc))

        scenario = Scenario(
            parties=int(doc.get("parties", 3)),
            model=model,
            fed=fed,
            data=data,
            latency=doc.get("latency", "auto"),
            seed=doc.get("seed"),
            distill=distill,
            processing_delay=float(doc.get("processing_delay", 0.0)),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError, ShapeError) as exc:
        raise ScenarioError(str(exc)) from exc

    if scenario.parties < 1:
        raise ScenarioError(f"'parties' must be >= 1, got {scenario.parties}")
    if scenario.seed is not None and not isinstance(scenario.seed, int):
        raise ScenarioError(f"'seed' must be an integer, got {scenario.seed!r}")
    if scenario.data.heterogeneity < 0 or scenario.data.heterogeneity > 1:
        raise ScenarioError(f"'data.heterogeneity' must be in [0, 1], got {scenario.data.heterogeneity}")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ScenarioError: With line and column for malformed JSON
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"Cannot read scenario {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, exc.lineno, exc.colno) from exc
    scenario = parse_scenario(doc)
    logger.info("Loaded scenario %s: %d parties, protocol %s", path, scenario.parties, scenario.fed.protocol)
    return scenario


def resolve_seed(cli_seed: Optional[int], scenario: Optional[Scenario] = None, env: Optional[Mapping[str, str]] = None) -> int:
    """
    Seed precedence: --seed, then the scenario's seed, then $FEDMASK_SEED, then 0.

    Raises:
        ScenarioError: If $FEDMASK_SEED is not an integer
    """
    if cli_seed is not None:
        return cli_seed
    if scenario is not None and scenario.seed is not None:
        return scenario.seed
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ScenarioError(f"{SEED_ENV}={raw!r} is not an integer") from exc
