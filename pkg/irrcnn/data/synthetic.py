"""
Deterministic synthetic corpus for fast tests and desk-scale comparisons.

Each class owns a Gaussian blob whose centre sits on a circle around the image
centre and whose colour mix depends on the class; seeded noise is added on top.
"""
import math
from typing import List

import numpy as np

from irrcnn.data.dataset import ArrayDataset, LabeledImage

NOISE_STD = 0.1


def _class_pattern(label: int, classes: int, size: int) -> np.ndarray:
    angle = 2.0 * math.pi * label / classes
    radius = size / 4.0
    cy = (size - 1) / 2.0 + radius * math.sin(angle)
    cx = (size - 1) / 2.0 + radius * math.cos(angle)
    sigma = max(size / 6.0, 0.75)
    yy, xx = np.mgrid[0:size, 0:size]
    blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))
    tint = np.array(
        [0.5 + 0.5 * math.cos(angle + 2.0 * math.pi * ch / 3.0) for ch in range(3)]
    )
    return (0.2 + 0.8 * tint[:, None, None]) * blob[None, :, :]


def synthetic_dataset(n: int, classes: int, size: int = 32, seed: int = 0) -> ArrayDataset:
    """
    ``n`` images (3, size, size) with balanced labels.

    Raises:
        ValueError: fewer than two classes or a non-positive size
    """
    if classes < 2:
        raise ValueError(f"Synthetic data needs at least 2 classes, got {classes}")
    if n < 1 or size < 1:
        raise ValueError(f"n and size must be positive, got n={n}, size={size}")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % classes)
    patterns = np.stack([_class_pattern(c, classes, size) for c in range(classes)])
    noise = rng.normal(0.0, NOISE_STD, size=(n, 3, size, size))
    images = np.clip(patterns[labels] + noise, 0.0, 1.0).astype(np.float32)
    return ArrayDataset(images=images, labels=labels.astype(np.int64), classes=classes)


def synthetic_blobs(n: int, classes: int, size: int = 32, seed: int = 0) -> List[LabeledImage]:
    """Same corpus as ``synthetic_dataset`` as a list of images."""
    return synthetic_dataset(n, classes, size, seed).to_images()
