"""
Report formatting: JSON documents and fixed-width text tables.
"""

import json
from typing import Sequence

from .collusion import AttackReport
from .scoreboard import ConformanceScoreboard, min_colluders

CONFORMANCE_HEADER = (
    "Protocol",
    "n",
    "k",
    "Holder sends",
    "Mediator recv",
    "Events",
    "Expected",
    "Latency (ms)",
    "Closed form (ms)",
    "Min colluders",
    "Status",
)


def text_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Left-aligned columns separated by two spaces, with a rule under the header."""
    cells = [[str(h) for h in header]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _sends(values: Sequence[int]) -> str:
    distinct = sorted(set(values))
    return str(distinct[0]) if len(distinct) == 1 else ",".join(str(v) for v in values)


def conformance_text(board: ConformanceScoreboard) -> str:
    rows = [
        (
            r.protocol,
            r.n,
            r.k,
            _sends(r.holder_sends),
            r.mediator_receives,
            r.total_events,
            r.expected_events,
            f"{r.measured_latency:.3f}",
            f"{r.closed_form_latency:.3f}",
            min_colluders(r.protocol, r.k),
            "PASS" if r.passed else "FAIL",
        )
        for r in board.rows
    ]
    return text_table(CONFORMANCE_HEADER, rows)


def conformance_json(board: ConformanceScoreboard) -> str:
    doc = {
        "passed": board.mismatches == 0,
        "matches": board.matches,
        "mismatches": board.mismatches,
        "rows": [r.to_dict() for r in board.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def attack_text(report: AttackReport) -> str:
    entropy = f"{report.residual_entropy:.2f} bits"
    lines = [
        f"Scenario:          {report.scenario.describe()}",
        f"Trials:            {report.trials}",
        f"Recovered trials:  {report.recovered_trials}",
        f"Residual entropy:  {entropy}",
        f"Verdict:           {report.verdict}",
    ]
    return "\n".join(lines) + "\n"


def attack_json(report: AttackReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
