"""
Datasets, augmentation and batching.
"""
from irrcnn.data.augment import hflip, random_hflip
from irrcnn.data.batching import BatchPlan, batches, sequential_batches
from irrcnn.data.cifar import (
    DatasetName,
    load_cifar,
    parse_cifar10,
    parse_cifar100,
    serialize_cifar10,
    serialize_cifar100,
)
from irrcnn.data.dataset import ArrayDataset, LabeledImage
from irrcnn.data.synthetic import synthetic_blobs, synthetic_dataset

__all__ = [
    "ArrayDataset",
    "BatchPlan",
    "DatasetName",
    "LabeledImage",
    "batches",
    "hflip",
    "load_cifar",
    "parse_cifar10",
    "parse_cifar100",
    "random_hflip",
    "sequential_batches",
    "serialize_cifar10",
    "serialize_cifar100",
    "synthetic_blobs",
    "synthetic_dataset",
]
