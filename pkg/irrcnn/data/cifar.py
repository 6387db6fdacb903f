"""
CIFAR-10 / CIFAR-100 binary batches.

CIFAR-10 record: 1 label byte + 3072 pixel bytes.
CIFAR-100 record: 1 coarse label byte + 1 fine label byte + 3072 pixel bytes.
Pixels are channel-planar (1024 R, 1024 G, 1024 B), each plane row-major 32x32.
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from irrcnn.data.dataset import ArrayDataset, LabeledImage
from irrcnn.exceptions import DatasetError, DatasetFormatError

IMAGE_SHAPE = (3, 32, 32)
PIXEL_BYTES = 3 * 32 * 32
CIFAR10_RECORD = 1 + PIXEL_BYTES
CIFAR100_RECORD = 2 + PIXEL_BYTES

CIFAR10_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR10_TEST_FILES = ("test_batch.bin",)
CIFAR100_TRAIN_FILES = ("train.bin",)
CIFAR100_TEST_FILES = ("test.bin",)


class DatasetName(str, Enum):
    CIFAR10 = "cifar10"
    CIFAR100 = "cifar100"
    SYNTHETIC = "synthetic"

    @property
    def classes(self) -> Optional[int]:
        return {DatasetName.CIFAR10: 10, DatasetName.CIFAR100: 100}.get(self)


def _split_records(
    data: bytes, label_bytes: int, classes: int, what: str
) -> Tuple[np.ndarray, np.ndarray]:
    record = label_bytes + PIXEL_BYTES
    if len(data) == 0 or len(data) % record:
        raise DatasetFormatError(
            f"{what}: {len(data)} bytes is not a whole number of {record}-byte records"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, record)
    labels = raw[:, :label_bytes].astype(np.int64)
    fine = labels[:, -1]
    bad = np.flatnonzero(fine >= classes)
    if bad.size:
        raise DatasetFormatError(
            f"{what}: record {int(bad[0])} has label {int(fine[bad[0]])}, expected < {classes}"
        )
    pixels = raw[:, label_bytes:].reshape(-1, *IMAGE_SHAPE).astype(np.float32) / 255.0
    return pixels, labels


def cifar10_arrays(data: bytes) -> ArrayDataset:
    pixels, labels = _split_records(data, 1, 10, "CIFAR-10")
    return ArrayDataset(images=pixels, labels=labels[:, 0], classes=10)


def cifar100_arrays(data: bytes) -> ArrayDataset:
    pixels, labels = _split_records(data, 2, 100, "CIFAR-100")
    return ArrayDataset(images=pixels, labels=labels[:, 1], classes=100, coarse_labels=labels[:, 0])


def parse_cifar10(data: bytes) -> List[LabeledImage]:
    """
    Decode CIFAR-10 records.

    Raises:
        DatasetFormatError: truncated data or a label byte above 9
    """
    return cifar10_arrays(data).to_images()


def parse_cifar100(data: bytes) -> List[LabeledImage]:
    """
    Decode CIFAR-100 records; the fine label is the training label.

    Raises:
        DatasetFormatError: truncated data or a fine label above 99
    """
    return cifar100_arrays(data).to_images()


def _pixel_bytes(img: LabeledImage) -> bytes:
    if img.pixels.shape != IMAGE_SHAPE:
        raise DatasetFormatError(f"CIFAR images are {IMAGE_SHAPE}, got {img.pixels.shape}")
    return np.rint(np.clip(img.pixels, 0.0, 1.0) * 255.0).astype(np.uint8).tobytes()


def serialize_cifar10(images: Sequence[LabeledImage]) -> bytes:
    """Encode images as CIFAR-10 records (pixels quantized to bytes)."""
    out = bytearray()
    for img in images:
        if not 0 <= img.label < 10:
            raise DatasetFormatError(f"CIFAR-10 label must be in [0, 10), got {img.label}")
        out.append(img.label)
        out += _pixel_bytes(img)
    return bytes(out)


def serialize_cifar100(images: Sequence[LabeledImage]) -> bytes:
    """Encode images as CIFAR-100 records; a missing coarse label is written as 0."""
    out = bytearray()
    for img in images:
        if not 0 <= img.label < 100:
            raise DatasetFormatError(f"CIFAR-100 label must be in [0, 100), got {img.label}")
        out.append(img.coarse_label or 0)
        out.append(img.label)
        out += _pixel_bytes(img)
    return bytes(out)


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise DatasetError(f"Cannot read {path}: {e}") from e


def load_cifar(
    data_dir: Path,
    dataset: DatasetName,
    split: str = "train",
    limit: Optional[int] = None,
) -> ArrayDataset:
    """
    Read the binary batches of one split from ``data_dir``.

    Args:
        data_dir: Directory holding the ``.bin`` files
        dataset: cifar10 or cifar100
        split: "train" or "test" (the test split doubles as validation)
        limit: Keep only the first ``limit`` images

    Raises:
        DatasetError: a file is missing or unreadable
        DatasetFormatError: a file is malformed
    """
    dataset = DatasetName(dataset)
    if limit is not None and limit < 1:
        raise ValueError(f"limit must be positive, got {limit}")
    if split not in ("train", "test"):
        raise ValueError(f"Unknown split: {split!r}")
    if dataset == DatasetName.CIFAR10:
        names = CIFAR10_TRAIN_FILES if split == "train" else CIFAR10_TEST_FILES
        parse = cifar10_arrays
    elif dataset == DatasetName.CIFAR100:
        names = CIFAR100_TRAIN_FILES if split == "train" else CIFAR100_TEST_FILES
        parse = cifar100_arrays
    else:
        raise ValueError(f"{dataset.value} is not a CIFAR dataset")

    parts = []
    loaded = 0
    for name in names:
        if limit is not None and loaded >= limit:
            break
        part = parse(_read(Path(data_dir) / name))
        parts.append(part)
        loaded += len(part)

    result = ArrayDataset(
        images=np.concatenate([p.images for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        classes=parts[0].classes,
        coarse_labels=(
            np.concatenate([p.coarse_labels for p in parts])
            if parts[0].coarse_labels is not None
            else None
        ),
    ).head(limit)
    logger.info(f"✅ Loaded {len(result)} {dataset.value} {split} images from {data_dir}")
    return result
