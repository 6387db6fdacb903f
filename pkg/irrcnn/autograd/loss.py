"""
Classification loss.
"""
from typing import List, Optional

import numpy as np

from irrcnn.autograd.tape import Var
from irrcnn.exceptions import ShapeError

LOG_FLOOR = 1e-12


def cross_entropy(probs: Var, labels: np.ndarray, l2_term: float = 0.0) -> Var:
    """
    Mean negative log-likelihood of the true classes plus a constant penalty.

    Args:
        probs: Softmax rows (n, K)
        labels: Integer class indices, length n
        l2_term: Weight penalty added to the reported value; its gradient is
            applied separately by ``irrcnn.optim.apply_l2``

    Returns:
        Scalar loss ``Var``

    Raises:
        ValueError: a label is outside [0, K)
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n, k = probs.shape[0], int(np.prod(probs.shape[1:]))
    p = probs.value.reshape(n, k)
    if labels.shape[0] != n:
        raise ShapeError(f"Got {labels.shape[0]} labels for a batch of {n}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"Labels must lie in [0, {k}), got range [{labels.min()}, {labels.max()}]")

    rows = np.arange(n)
    picked = p[rows, labels]
    clamped = np.maximum(picked, LOG_FLOOR)
    value = np.asarray(-np.log(clamped).mean() + l2_term, dtype=probs.dtype)
    shape = probs.shape

    def _backward(grad: np.ndarray) -> List[Optional[np.ndarray]]:
        dp = np.zeros((n, k), dtype=probs.dtype)
        live = picked > LOG_FLOOR
        dp[rows[live], labels[live]] = -grad / (n * picked[live])
        return [dp.reshape(shape)]

    return probs.tape.apply("cross_entropy", [probs], value, _backward)
