"""
Inference-mode evaluation and top-k accuracy.
"""
import time

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.loss import cross_entropy
from irrcnn.autograd.tape import Tape
from irrcnn.data.batching import sequential_batches
from irrcnn.data.dataset import ArrayDataset
from irrcnn.layers.base import ForwardContext
from irrcnn.models.network import Network
from irrcnn.schemas.training import EvalResult
from irrcnn.utils.metrics import record_eval


def topk_hits(logits: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """
    Per-sample flag: the true label is among the ``k`` largest logits.

    Equal logits rank the lower class index first.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    k = min(k, logits.shape[1])
    ranked = np.argsort(-logits, axis=1, kind="stable")[:, :k]
    return np.any(ranked == np.asarray(labels).reshape(-1, 1), axis=1)


def topk_accuracy(logits: np.ndarray, labels: np.ndarray, k: int = 1) -> float:
    if len(labels) == 0:
        return 0.0
    return float(topk_hits(logits, labels, k).mean())


def evaluate(model: Network, dataset: ArrayDataset, batch_size: int = 128) -> EvalResult:
    """
    Mean cross-entropy (no L2 term), top-1 and top-5 over ``dataset``.

    Batch norm uses its running statistics and dropout is off.
    """
    started = time.perf_counter()
    loss_sum = 0.0
    top1 = 0
    top5 = 0
    for images, labels in sequential_batches(dataset, batch_size):
        tape = Tape(record=False)
        logits = model.forward(ForwardContext.infer(tape), model.input(tape, images))
        loss = cross_entropy(F.softmax(logits), labels)
        loss_sum += float(loss.value) * len(labels)
        top1 += int(topk_hits(logits.value, labels, 1).sum())
        top5 += int(topk_hits(logits.value, labels, 5).sum())
    n = len(dataset)
    record_eval(time.perf_counter() - started)
    return EvalResult(
        loss=loss_sum / n if n else 0.0,
        top1=top1 / n if n else 0.0,
        top5=top5 / n if n else 0.0,
        samples=n,
    )
