"""
On-disk formats: checkpoints and CSV run logs.
"""
from irrcnn.storage.checkpoint import (
    CheckpointHeader,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from irrcnn.storage.metrics_log import MetricsLog, read_metrics, write_lsuv_report

__all__ = [
    "CheckpointHeader",
    "MetricsLog",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "read_metrics",
    "save_checkpoint",
    "write_lsuv_report",
]
