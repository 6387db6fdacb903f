"""
Fan-scaled uniform initialization.
"""
import math
from typing import Sequence

import numpy as np
from loguru import logger

from irrcnn.core.tensor import Precision
from irrcnn.layers.base import Layer, ParamRole


def scaled_uniform_init(
    shape: Sequence[int],
    fan_in: int,
    fan_out: int,
    rng: np.random.Generator,
    precision: Precision = Precision.STANDARD,
) -> np.ndarray:
    """
    Sample U[-L, L] with L = sqrt(6 / (fan_in + fan_out)).

    Raises:
        ValueError: a fan is not positive
    """
    if fan_in <= 0 or fan_out <= 0:
        raise ValueError(f"Fans must be positive, got fan_in={fan_in}, fan_out={fan_out}")
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=tuple(shape)).astype(precision.dtype)


def init_model(model: Layer, rng: np.random.Generator) -> None:
    """
    Reset every parameter in place, in registration order.

    Weights get ``scaled_uniform_init``, biases and BN beta zero, BN gamma one.
    Batch-norm running statistics go back to mean 0, variance 1.
    """
    for p in model.parameters():
        if p.role == ParamRole.WEIGHT:
            precision = Precision.from_dtype(p.value.dtype)
            p.value[...] = scaled_uniform_init(p.value.shape, p.fan_in, p.fan_out, rng, precision)
        elif p.role == ParamRole.GAMMA:
            p.value[...] = 1
        else:
            p.value[...] = 0
    for name, buffer in model.buffers():
        buffer[...] = 1 if name.endswith("running_var") else 0
    logger.debug(f"Initialized {model.param_count()} parameters with scaled uniform")
