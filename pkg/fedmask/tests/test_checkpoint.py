"""
Unit tests for checkpoints, atomic writes and metric logs.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

from fedmask.federation.checkpoint import (
    MAGIC,
    Checkpoint,
    CheckpointError,
    check_spec,
    csv_text,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
    write_atomic,
    write_metrics_csv,
)
from fedmask.federation.runtime import RoundRecord
from fedmask.models.network_model import NetworkSpec, ParamVector, ShapeError, init_params

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))


@pytest.fixture
def checkpoint():
    spec = NetworkSpec((8, 6, 4, 2), 1)
    return Checkpoint(spec, init_params(spec, np.random.default_rng(0)), round=7)


class TestCheckpoint:
    """Test cases for checkpoint files."""

    def test_save_and_load(self, tmp_path, checkpoint):
        """Test spec, round and parameters are restored exactly."""
        path = tmp_path / "ckpt" / "init.ckpt"
        save_checkpoint(path, checkpoint)
        loaded = load_checkpoint(path)
        assert loaded.spec.layer_sizes == (8, 6, 4, 2)
        assert loaded.spec.head_start == 1
        assert loaded.round == 7
        assert np.array_equal(loaded.params.values, checkpoint.params.values)
        assert loaded.params.head_offset == checkpoint.spec.head_offset

    def test_header(self, checkpoint):
        """Test files start with the magic bytes."""
        assert encode_checkpoint(checkpoint)[:4] == MAGIC

    def test_missing_file(self, tmp_path):
        """Test loading a missing file raises CheckpointError."""
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "none.ckpt")

    @pytest.mark.parametrize("cut", [3, 30])
    def test_truncated(self, checkpoint, cut):
        """Test truncated data is rejected."""
        with pytest.raises(CheckpointError):
            decode_checkpoint(encode_checkpoint(checkpoint)[:cut])

    def test_bad_magic(self, checkpoint):
        """Test foreign files are rejected."""
        data = b"XXXX" + encode_checkpoint(checkpoint)[4:]
        with pytest.raises(CheckpointError):
            decode_checkpoint(data)

    def test_param_count_mismatch(self):
        """Test parameters that do not fit the stored spec are rejected."""
        bad = Checkpoint(NetworkSpec((8, 6, 2)), ParamVector(np.zeros(5), 0))
        with pytest.raises(CheckpointError):
            decode_checkpoint(encode_checkpoint(bad))

    def test_check_spec(self, checkpoint):
        """Test layer sizes must match the scenario."""
        check_spec(checkpoint, NetworkSpec((8, 6, 4, 2)))
        with pytest.raises(ShapeError):
            check_spec(checkpoint, NetworkSpec((8, 5, 4, 2)))


class TestFiles:
    """Test cases for atomic writes and CSV logs."""

    def test_write_atomic_leaves_no_temporaries(self, tmp_path):
        """Test only the target file remains after a write."""
        write_atomic(tmp_path / "out" / "a.txt", "hello")
        write_atomic(tmp_path / "out" / "a.txt", b"again")
        assert [p.name for p in (tmp_path / "out").iterdir()] == ["a.txt"]
        assert (tmp_path / "out" / "a.txt").read_bytes() == b"again"

    def test_csv_text_repr_floats(self):
        """Test floats keep their full repr."""
        text = csv_text(("a", "b"), [(0.1, 3), ("personal:2", 1 / 3)])
        assert text == "a,b\n0.1,3\npersonal:2,0.3333333333333333\n"

    def test_metrics_csv(self, tmp_path):
        """Test the metrics log header and row layout."""
        record = RoundRecord(1, 0.25, 0.75, 0.5, 1.0, 2 / 3, 6, 120, 5.0, val_loss=0.3)
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, [record])
        lines = path.read_text().splitlines()
        assert lines[0] == "round,global_loss,val_accuracy,precision,recall,f1,messages,bytes,latency_ms"
        assert lines[1] == "1,0.25,0.75,0.5,1.0,0.6666666666666666,6,120,5.0"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
