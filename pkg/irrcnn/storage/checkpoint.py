"""
Binary checkpoint format.

Layout (all integers little-endian):

    b"IRRC" | u32 version | u32 n + n bytes ArchSpec JSON | u32 epoch | u64 seed
    u32 entry count
    per entry: u32 n + n bytes name | u8 rank | rank x u32 dims | raw values

Values are stored in the model's precision without compression, so a reload
reproduces forward outputs bit for bit. Batch-norm running statistics are
stored as ordinary entries after the parameters.
"""
import io
import struct
from pathlib import Path
from typing import BinaryIO, Dict, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from irrcnn.exceptions import ArchitectureError, CheckpointError
from irrcnn.models.arch import build_model
from irrcnn.models.network import Network
from irrcnn.schemas.arch import ArchSpec

MAGIC = b"IRRC"
FORMAT_VERSION = 1


class CheckpointHeader(BaseModel):
    version: int = Field(default=FORMAT_VERSION, ge=1)
    arch: ArchSpec
    epoch: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)


def _write_entry(buf: BinaryIO, name: str, value: np.ndarray, dtype: np.dtype) -> None:
    encoded = name.encode("utf-8")
    buf.write(struct.pack("<I", len(encoded)))
    buf.write(encoded)
    buf.write(struct.pack("<B", value.ndim))
    buf.write(struct.pack(f"<{value.ndim}I", *value.shape))
    buf.write(np.ascontiguousarray(value, dtype=dtype.newbyteorder("<")).tobytes())


def encode_checkpoint(model: Network, epoch: int = 0, seed: int = 0) -> bytes:
    """Serialize ``model`` (parameters and batch-norm buffers) to bytes."""
    dtype = model.precision.dtype
    arch_json = model.arch.model_dump_json().encode("utf-8")
    entries = model.state()

    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", FORMAT_VERSION, len(arch_json)))
    buf.write(arch_json)
    buf.write(struct.pack("<IQ", epoch, seed))
    buf.write(struct.pack("<I", len(entries)))
    for name, value in entries.items():
        _write_entry(buf, name, value, dtype)
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointError(
                f"Checkpoint truncated: needed {size} bytes at offset {self.offset}"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple[int, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_checkpoint(data: bytes) -> Tuple[CheckpointHeader, Dict[str, np.ndarray]]:
    """
    Parse checkpoint bytes into the header and named arrays.

    Raises:
        CheckpointError: bad magic, unknown version, truncation, duplicate names
    """
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise CheckpointError("Not a checkpoint: bad magic")
    version, arch_len = reader.unpack("<II")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}")
    try:
        arch = ArchSpec.model_validate_json(reader.take(arch_len))
    except ValidationError as e:
        raise CheckpointError(f"Checkpoint architecture header is invalid: {e}") from e
    epoch, seed = reader.unpack("<IQ")
    header = CheckpointHeader(version=version, arch=arch, epoch=epoch, seed=seed)

    dtype = arch.precision.dtype.newbyteorder("<")
    (count,) = reader.unpack("<I")
    entries: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<I")
        name = reader.take(name_len).decode("utf-8")
        if name in entries:
            raise CheckpointError(f"Duplicate checkpoint entry {name!r}")
        (rank,) = reader.unpack("<B")
        shape = reader.unpack(f"<{rank}I")
        size = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(size * dtype.itemsize)
        entries[name] = np.frombuffer(raw, dtype=dtype).reshape(shape)
    if reader.offset != len(data):
        raise CheckpointError(f"{len(data) - reader.offset} trailing bytes after the last entry")
    return header, entries


def restore_state(model: Network, entries: Dict[str, np.ndarray]) -> None:
    """
    Copy named arrays into the model in place.

    Raises:
        CheckpointError: an entry is missing, unexpected or has the wrong shape
    """
    state = model.state()
    missing = sorted(set(state) - set(entries))
    unexpected = sorted(set(entries) - set(state))
    if missing or unexpected:
        raise CheckpointError(
            f"Checkpoint does not match its architecture: missing {missing[:5]}, "
            f"unexpected {unexpected[:5]}"
        )
    for name, target in state.items():
        value = entries[name]
        if value.shape != target.shape:
            raise CheckpointError(
                f"Shape mismatch for {name}: checkpoint {value.shape}, model {target.shape}"
            )
        target[...] = value


def save_checkpoint(path: Path, model: Network, epoch: int = 0, seed: int = 0) -> Path:
    """Write the checkpoint through a temporary file so a crash never leaves half a file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(encode_checkpoint(model, epoch, seed))
    tmp.replace(path)
    logger.info(f"✅ Checkpoint saved: {path} (epoch {epoch})")
    return path


def load_checkpoint(path: Path) -> Tuple[Network, CheckpointHeader]:
    """
    Rebuild the model described by a checkpoint header and load its weights.

    Raises:
        CheckpointError: unreadable, corrupt or inconsistent checkpoint
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    header, entries = decode_checkpoint(data)
    try:
        model = build_model(header.arch)
    except ArchitectureError as e:
        raise CheckpointError(f"Checkpoint architecture cannot be built: {e}") from e
    restore_state(model, entries)
    logger.info(
        f"✅ Checkpoint loaded: {path} ({header.arch.variant.value}, epoch {header.epoch})"
    )
    return model, header
