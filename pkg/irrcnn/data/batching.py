"""
Epoch plans and mini-batch iteration.
"""
import math
from typing import Iterator, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from irrcnn.data.augment import random_hflip
from irrcnn.data.dataset import ArrayDataset

Batch = Tuple[np.ndarray, np.ndarray]


class BatchPlan(BaseModel):
    """Which permutation and batch size one epoch uses."""

    size: int = Field(..., ge=1, description="Dataset size N")
    batch_size: int = Field(default=128, ge=1)
    seed: int = Field(default=0, ge=0)
    epoch: int = Field(default=0, ge=0)

    @property
    def batch_count(self) -> int:
        return math.ceil(self.size / self.batch_size)

    def order(self) -> np.ndarray:
        """Seeded permutation of 0..N-1 for this epoch."""
        return np.random.default_rng([self.seed, self.epoch]).permutation(self.size)


def batches(
    dataset: ArrayDataset,
    plan: BatchPlan,
    augment: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Iterator[Batch]:
    """
    Yield (images, labels) batches in the plan's order; the last batch may be short.

    When ``augment`` is set each image is flipped with probability 0.5; flips
    come from ``rng`` or, when omitted, from a generator seeded by the plan.
    """
    if plan.size != len(dataset):
        raise ValueError(f"Plan is for {plan.size} images, dataset has {len(dataset)}")
    if augment and rng is None:
        rng = np.random.default_rng([plan.seed, plan.epoch, 1])
    order = plan.order()
    for start in range(0, plan.size, plan.batch_size):
        index = order[start : start + plan.batch_size]
        images = dataset.images[index]
        if augment and rng is not None:
            images = random_hflip(images, rng)
        yield images, dataset.labels[index]


def sequential_batches(dataset: ArrayDataset, batch_size: int) -> Iterator[Batch]:
    """Unshuffled, unaugmented batches for evaluation."""
    for start in range(0, len(dataset), batch_size):
        yield dataset.images[start : start + batch_size], dataset.labels[start : start + batch_size]
