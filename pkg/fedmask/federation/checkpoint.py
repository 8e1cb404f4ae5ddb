"""
Checkpoints and Metric Logs

A checkpoint holds the network spec, the round index and the parameter
vector:

    magic b"FMCK" | version u32 | round u64 | spec JSON length u32 | spec JSON | ParamVector bytes

All integers are little-endian. Every file written here goes to a temporary
file in the target directory first and is renamed into place.
"""

import csv
import io
import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from ..models.network_model import NetworkSpec, ParamVector, ShapeError
from .runtime import RoundRecord

logger = logging.getLogger(__name__)

MAGIC = b"FMCK"
VERSION = 1
_HEADER = struct.Struct("<4sIQI")

PathLike = Union[str, Path]


class CheckpointError(OSError):
    """Raised when a checkpoint is missing or cannot be decoded."""

    pass  # pylint: disable=unnecessary-pass


@dataclass
class Checkpoint:
    """Parameters with the spec they belong to and the round they were taken at."""

    spec: NetworkSpec
    params: ParamVector
    round: int = 0


def write_atomic(path: PathLike, data: Union[bytes, str]):
    """Write data to path through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(raw)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("Wrote %s (%d bytes)", path, len(raw))


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    spec_json = json.dumps(
        {**checkpoint.spec.to_dict(), "output_activation": checkpoint.spec.output_activation}, sort_keys=True
    ).encode("utf-8")
    header = _HEADER.pack(MAGIC, VERSION, checkpoint.round, len(spec_json))
    return header + spec_json + checkpoint.params.to_bytes()


def decode_checkpoint(data: bytes) -> Checkpoint:
    """
    Inverse of encode_checkpoint.

    Raises:
        CheckpointError: On a bad header, spec or parameter block
    """
    if len(data) < _HEADER.size:
        raise CheckpointError("Checkpoint truncated")
    magic, version, round_index, spec_len = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise CheckpointError(f"Not a version-{VERSION} checkpoint (magic {magic!r}, version {version})")
    body = data[_HEADER.size :]
    try:
        spec_doc = json.loads(body[:spec_len].decode("utf-8"))
        spec = NetworkSpec(tuple(spec_doc["layer_sizes"]), spec_doc["head_start_layer"], spec_doc["output_activation"])
        params = ParamVector.from_bytes(body[spec_len:])
    except (ValueError, KeyError, TypeError, struct.error) as exc:
        raise CheckpointError(f"Corrupt checkpoint: {exc}") from exc
    if len(params) != spec.total_param_count:
        raise CheckpointError(f"Checkpoint holds {len(params)} params, spec needs {spec.total_param_count}")
    if params.head_offset != spec.head_offset:
        params = ParamVector(params.values, spec.head_offset)
    return Checkpoint(spec, params, int(round_index))


def save_checkpoint(path: PathLike, checkpoint: Checkpoint):
    write_atomic(path, encode_checkpoint(checkpoint))


def load_checkpoint(path: PathLike) -> Checkpoint:
    """
    Read a checkpoint file.

    Raises:
        CheckpointError: If the file is missing or corrupt
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    checkpoint = decode_checkpoint(path.read_bytes())
    logger.info("Loaded checkpoint %s (round %d, %d params)", path, checkpoint.round, len(checkpoint.params))
    return checkpoint


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV document with fixed float formatting so reruns are byte-identical."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    return buffer.getvalue()


def write_metrics_csv(path: PathLike, records: Iterable[RoundRecord]):
    """Metrics log: one row per round (and per personalized party)."""
    write_atomic(path, csv_text(RoundRecord.CSV_COLUMNS, (r.csv_row() for r in records)))


def check_spec(checkpoint: Checkpoint, expected: NetworkSpec):
    """
    Raise ShapeError unless the checkpoint's layer sizes match `expected`.
    """
    if checkpoint.spec.layer_sizes != expected.layer_sizes:
        raise ShapeError(f"Checkpoint layers {checkpoint.spec.layer_sizes} != scenario layers {expected.layer_sizes}")
