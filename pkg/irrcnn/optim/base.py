"""
Shared optimizer plumbing.
"""
from abc import ABC, abstractmethod
from typing import Dict

import numpy as np

from irrcnn.autograd.tape import GradMap
from irrcnn.exceptions import NonFiniteError, ShapeError

Params = Dict[str, np.ndarray]


def check_step_inputs(params: Params, grads: GradMap) -> None:
    """
    Raises:
        ShapeError: a parameter has no gradient or a gradient of another shape
        NonFiniteError: a gradient holds NaN or infinity
    """
    for name, value in params.items():
        grad = grads.get(name)
        if grad is None:
            raise ShapeError(f"No gradient for parameter {name}")
        if grad.shape != value.shape:
            raise ShapeError(f"Gradient for {name} has shape {grad.shape}, expected {value.shape}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"Non-finite gradient for {name}")


class Optimizer(ABC):
    """Updates parameter arrays in place from a gradient map and the current loss."""

    @abstractmethod
    def step(self, params: Params, grads: GradMap, loss: float) -> Params:
        """Apply one update and return ``params``."""

    @property
    @abstractmethod
    def learning_rate(self) -> float:
        """Rate the next step will use."""
