"""
Labeled images and the array-backed dataset the trainer iterates over.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from irrcnn.exceptions import DatasetFormatError


@dataclass(frozen=True)
class LabeledImage:
    """Pixels (3, h, w) in [0, 1] and a class index."""

    pixels: np.ndarray
    label: int
    coarse_label: Optional[int] = None


@dataclass
class ArrayDataset:
    """
    Stacked images (N, 3, h, w) float32 and labels (N,) int64.

    Attributes:
        images: Pixel values in [0, 1]
        labels: Class indices
        classes: Number of classes K
        coarse_labels: CIFAR-100 superclass per image (kept, not trained on)
    """

    images: np.ndarray
    labels: np.ndarray
    classes: int
    coarse_labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.images.ndim != 4:
            raise DatasetFormatError(f"Images must be (N, c, h, w), got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise DatasetFormatError(
                f"{self.labels.shape[0]} labels for {self.images.shape[0]} images"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise DatasetFormatError(f"Labels must lie in [0, {self.classes})")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def image_shape(self) -> Tuple[int, ...]:
        return tuple(self.images.shape[1:])

    @classmethod
    def from_images(cls, items: Sequence[LabeledImage], classes: int) -> "ArrayDataset":
        if not items:
            raise DatasetFormatError("Cannot build a dataset from zero images")
        coarse = None
        if all(item.coarse_label is not None for item in items):
            coarse = np.array([item.coarse_label for item in items], dtype=np.int64)
        return cls(
            images=np.stack([item.pixels for item in items]).astype(np.float32),
            labels=np.array([item.label for item in items], dtype=np.int64),
            classes=classes,
            coarse_labels=coarse,
        )

    def to_images(self) -> List[LabeledImage]:
        return [
            LabeledImage(
                pixels=self.images[i],
                label=int(self.labels[i]),
                coarse_label=None if self.coarse_labels is None else int(self.coarse_labels[i]),
            )
            for i in range(len(self))
        ]

    def head(self, limit: Optional[int]) -> "ArrayDataset":
        """First ``limit`` images (all of them when ``limit`` is None)."""
        if limit is None or limit >= len(self):
            return self
        return ArrayDataset(
            images=self.images[:limit],
            labels=self.labels[:limit],
            classes=self.classes,
            coarse_labels=None if self.coarse_labels is None else self.coarse_labels[:limit],
        )
