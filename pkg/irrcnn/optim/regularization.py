"""
L2 weight penalty.
"""
from typing import Dict, Iterable

import numpy as np

from irrcnn.autograd.tape import GradMap
from irrcnn.layers.base import Parameter, ParamRole
from irrcnn.schemas.training import L2Scope

DEFAULT_L2 = 0.002


def covered_weights(
    params: Iterable[Parameter], scope: L2Scope = L2Scope.BLOCKS
) -> Dict[str, np.ndarray]:
    """Weights the penalty applies to: block convolutions only, or every weight matrix."""
    if scope == L2Scope.ALL:
        return {p.name: p.value for p in params if p.role == ParamRole.WEIGHT}
    return {p.name: p.value for p in params if p.regularized}


def l2_penalty(weights: Dict[str, np.ndarray], lambda_reg: float = DEFAULT_L2) -> float:
    """lambda_reg * sum of squared weights."""
    if lambda_reg == 0.0:
        return 0.0
    return lambda_reg * float(sum(np.sum(np.square(w, dtype=np.float64)) for w in weights.values()))


def apply_l2(
    grads: GradMap, weights: Dict[str, np.ndarray], lambda_reg: float = DEFAULT_L2
) -> GradMap:
    """
    Add ``2 * lambda_reg * w`` to the gradient of every covered weight.

    Returns a new map; gradients of uncovered parameters are passed through.
    """
    if lambda_reg == 0.0:
        return dict(grads)
    updated = dict(grads)
    for name, w in weights.items():
        updated[name] = grads[name] + (2.0 * lambda_reg) * w
    return updated
