"""
Privacy and conformance analysis.

Collusion attacks measure who can reconstruct a party's secret under each
protocol; the conformance scoreboard checks message counts and round
latency against their analytic values.
"""

from .collusion import (
    AttackReport,
    Attempt,
    CollusionScenario,
    UndeterminedReport,
    collude,
    random_secrets,
    run_collusion_trials,
    shamir_undetermined,
    stsmc_recover,
    summarize,
)
from .scoreboard import (
    BENCH_PROTOCOLS,
    ConformanceRow,
    ConformanceScoreboard,
    expected_total_events,
    min_colluders,
    protocol_k,
    benchmark_protocols,
)
from .report import attack_json, attack_text, conformance_json, conformance_text, text_table

__all__ = [
    "AttackReport",
    "Attempt",
    "CollusionScenario",
    "UndeterminedReport",
    "collude",
    "random_secrets",
    "run_collusion_trials",
    "shamir_undetermined",
    "stsmc_recover",
    "summarize",
    "BENCH_PROTOCOLS",
    "ConformanceRow",
    "ConformanceScoreboard",
    "expected_total_events",
    "min_colluders",
    "protocol_k",
    "benchmark_protocols",
    "attack_json",
    "attack_text",
    "conformance_json",
    "conformance_text",
    "text_table",
]
