"""
Inverted dropout.
"""
from typing import Literal, Optional

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.layers.base import ForwardContext, Layer


def dropout(
    x: Var,
    rate: float,
    mode: Literal["train", "infer"],
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Var:
    """
    Zero each element with probability ``rate`` in train mode and scale survivors.

    Args:
        x: Input
        rate: Drop probability in [0, 1)
        mode: "train" draws a mask, "infer" is the identity
        seed: Mask seed, used when ``rng`` is not given
        rng: Mask generator

    Raises:
        ValueError: rate outside [0, 1)
    """
    if rng is None and mode == "train":
        rng = np.random.default_rng(seed)
    return F.dropout(x, rate, active=mode == "train", rng=rng)


class Dropout(Layer):
    def __init__(self, name: str, rate: float = 0.5):
        super().__init__(name)
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"{name}: dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        return F.dropout(x, self.rate, active=ctx.dropout, rng=ctx.rng)
