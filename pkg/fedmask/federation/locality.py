"""
Data-Locality Scanner

Checks that no message payload carries a copy of a raw training sample.
Every training window is encoded the way it could leak (fixed-point ring
words and raw float64 bit patterns) and searched for as a contiguous run
in every payload.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ..data.partition import PartyData
from ..models.fixed_point_model import FixedPointCodec
from ..sim.simnet import Transcript

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalityHit:
    """A payload position where a training window was found."""

    party_id: int
    sample_index: int
    encoding: str
    sender: int
    receiver: int
    phase: str
    offset: int


@dataclass
class LocalityReport:
    """Outcome of a scan."""

    messages_scanned: int = 0
    windows: int = 0
    hits: list[LocalityHit] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.hits


def _encodings(parties: Sequence[PartyData], codec: FixedPointCodec) -> list[tuple[int, int, str, np.ndarray]]:
    patterns = []
    for party in parties:
        train = party.part("train")
        for row, window in zip(party.shard.train, train.windows):
            patterns.append((party.party_id, int(row), "ring", codec.quantize_vector(window)))
            patterns.append((party.party_id, int(row), "float64", np.ascontiguousarray(window, dtype="<f8").view(np.uint64)))
    return patterns


def scan_transcripts(
    transcripts: Iterable[Transcript],
    parties: Sequence[PartyData],
    codec: Optional[FixedPointCodec] = None,
) -> LocalityReport:
    """
    Search every payload for contiguous copies of any training window.

    Candidate offsets are found by matching each pattern's first word, then
    the full window is compared.
    """
    codec = codec if codec is not None else FixedPointCodec()
    patterns = _encodings(parties, codec)
    by_first: dict[int, list[tuple[int, int, str, np.ndarray]]] = {}
    for pattern in patterns:
        if pattern[3].size:
            by_first.setdefault(int(pattern[3][0]), []).append(pattern)
    firsts = np.fromiter(by_first.keys(), dtype=np.uint64, count=len(by_first))

    report = LocalityReport(windows=len(patterns) // 2)
    for transcript in transcripts:
        for msg in transcript.messages:
            report.messages_scanned += 1
            payload = msg.payload
            for offset in np.flatnonzero(np.isin(payload, firsts)):
                for party_id, sample, encoding, words in by_first[int(payload[offset])]:
                    end = offset + words.size
                    if end <= payload.size and np.array_equal(payload[offset:end], words):
                        report.hits.append(
                            LocalityHit(party_id, sample, encoding, msg.sender, msg.receiver, msg.round_tag.phase, int(offset))
                        )
    if report.clean:
        logger.info("Locality scan: %d messages, %d windows, no raw data found", report.messages_scanned, report.windows)
    else:
        logger.error("Locality scan: %d raw-data hits in %d messages", len(report.hits), report.messages_scanned)
    return report
