"""
Tests for the checkpoint format and the CSV run logs.
"""
import struct

import numpy as np
import pytest

from irrcnn.data.synthetic import synthetic_dataset
from irrcnn.exceptions import CheckpointError
from irrcnn.schemas.training import LsuvReportRow, MetricsRow
from irrcnn.storage import (
    MetricsLog,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    read_metrics,
    save_checkpoint,
    write_lsuv_report,
)
from irrcnn.storage.checkpoint import FORMAT_VERSION, MAGIC, restore_state
from irrcnn.storage.metrics_log import METRICS_COLUMNS
from irrcnn.training.trainer import Trainer


@pytest.fixture
def trained(miniature, tiny_config):
    """Miniature model after one SGD step, so BN running stats have moved."""
    data = synthetic_dataset(16, classes=4, size=8, seed=0)
    Trainer(miniature, tiny_config).train_step(data.images, data.labels)
    return miniature


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, trained, tmp_path):
        path = save_checkpoint(tmp_path / "model.ckpt", trained, epoch=3, seed=11)
        loaded, header = load_checkpoint(path)
        assert header.epoch == 3
        assert header.seed == 11
        assert header.version == FORMAT_VERSION
        assert header.arch == trained.arch
        original = trained.state()
        restored = loaded.state()
        assert list(restored) == list(original)
        for name, value in original.items():
            assert restored[name].dtype == value.dtype
            assert restored[name].tobytes() == value.tobytes(), name
        images = synthetic_dataset(4, classes=4, size=8, seed=9).images
        assert loaded.logits(images).tobytes() == trained.logits(images).tobytes()

    def test_running_stats_are_stored(self, trained):
        _, entries = decode_checkpoint(encode_checkpoint(trained))
        assert not np.all(entries["stem0.bn.running_mean"] == 0)

    def test_encoding_is_deterministic(self, trained):
        assert encode_checkpoint(trained, 1, 2) == encode_checkpoint(trained, 1, 2)

    def test_bad_magic(self, miniature):
        data = encode_checkpoint(miniature)
        with pytest.raises(CheckpointError, match="magic"):
            decode_checkpoint(b"XXXX" + data[4:])

    def test_unknown_version(self, miniature):
        data = encode_checkpoint(miniature)
        patched = MAGIC + struct.pack("<I", FORMAT_VERSION + 1) + data[8:]
        with pytest.raises(CheckpointError, match="version"):
            decode_checkpoint(patched)

    def test_truncated(self, miniature):
        data = encode_checkpoint(miniature)
        for cut in (2, 10, len(data) // 2, len(data) - 1):
            with pytest.raises(CheckpointError):
                decode_checkpoint(data[:cut])

    def test_trailing_bytes(self, miniature):
        with pytest.raises(CheckpointError, match="trailing"):
            decode_checkpoint(encode_checkpoint(miniature) + b"\x00")

    def test_state_mismatch(self, miniature):
        _, entries = decode_checkpoint(encode_checkpoint(miniature))
        entries = dict(entries)
        entries.pop("classifier.bias")
        with pytest.raises(CheckpointError, match="missing"):
            restore_state(miniature, entries)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.ckpt")

    def test_no_temporary_file_left(self, miniature, tmp_path):
        save_checkpoint(tmp_path / "ckpt" / "model.ckpt", miniature)
        assert [p.name for p in (tmp_path / "ckpt").iterdir()] == ["model.ckpt"]


def metrics_row(epoch: int, **changes) -> MetricsRow:
    values = dict(
        epoch=epoch,
        train_loss=1.0 / 3.0,
        train_acc=0.5,
        val_loss=0.1 + 0.2,
        val_acc=0.25,
        top5_acc=1.0,
        learning_rate=0.01 / (1.0 + 9.99e-7 * 7),
        seconds=0.0,
    )
    values.update(changes)
    return MetricsRow(**values)


class TestMetricsLog:
    def test_header_and_rows(self, tmp_path):
        log = MetricsLog(tmp_path / "metrics.csv")
        log.append(metrics_row(1))
        log.append(metrics_row(2))
        lines = (tmp_path / "metrics.csv").read_text().splitlines()
        assert lines[0] == ",".join(METRICS_COLUMNS)
        assert len(lines) == 3
        assert lines[1].startswith("1,0.3333333333333333,0.5,0.30000000000000004,")

    def test_floats_survive_exactly(self, tmp_path):
        rows = [metrics_row(1), metrics_row(2, train_loss=2.5e-17)]
        log = MetricsLog(tmp_path / "metrics.csv")
        for row in rows:
            log.append(row)
        assert read_metrics(tmp_path / "metrics.csv") == rows

    def test_creating_a_log_truncates(self, tmp_path):
        MetricsLog(tmp_path / "metrics.csv").append(metrics_row(1))
        MetricsLog(tmp_path / "metrics.csv")
        assert read_metrics(tmp_path / "metrics.csv") == []

    def test_rejects_foreign_csv(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_metrics(path)


def test_lsuv_report(tmp_path):
    rows = [
        LsuvReportRow(layer="stem0.conv", iterations=1, variance=0.99, converged=True),
        LsuvReportRow(layer="classifier", iterations=10, variance=1.5, converged=False),
    ]
    path = write_lsuv_report(tmp_path / "lsuv.csv", rows)
    assert path.read_text().splitlines() == [
        "layer,iterations,variance,converged",
        "stem0.conv,1,0.99,True",
        "classifier,10,1.5,False",
    ]
