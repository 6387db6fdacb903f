"""
Batch normalization over (n, h, w) per channel.
"""
from dataclasses import dataclass
from typing import List, Literal, Tuple

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ShapeError
from irrcnn.layers.base import ForwardContext, Layer, Parameter, ParamRole

Mode = Literal["train", "infer"]


@dataclass
class BatchNormParams:
    """Affine parameters, running statistics and the smoothing constants."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.99
    epsilon: float = 1e-5

    def __post_init__(self) -> None:
        c = self.gamma.shape
        for name in ("beta", "running_mean", "running_var"):
            if getattr(self, name).shape != c:
                shape = getattr(self, name).shape
                raise ShapeError(f"BatchNorm {name} has shape {shape}, expected {c}")
        if np.any(self.running_var < 0):
            raise ValueError("running_var must be non-negative")

    @classmethod
    def identity(
        cls, channels: int, precision: Precision = Precision.STANDARD
    ) -> "BatchNormParams":
        dtype = precision.dtype
        return cls(
            gamma=np.ones(channels, dtype=dtype),
            beta=np.zeros(channels, dtype=dtype),
            running_mean=np.zeros(channels, dtype=dtype),
            running_var=np.ones(channels, dtype=dtype),
        )


def batch_norm(x: Var, p: BatchNormParams, mode: Mode) -> Var:
    """
    Normalize ``x`` with ``p``.

    Train mode uses batch statistics and updates ``p``'s running buffers in
    place; infer mode uses the running buffers.
    """
    if mode not in ("train", "infer"):
        raise ValueError(f"Unknown batch norm mode: {mode!r}")
    tape = x.tape
    training = mode == "train"
    return F.batch_norm(
        x,
        tape.constant(p.gamma),
        tape.constant(p.beta),
        p.running_mean,
        p.running_var,
        training=training,
        update_stats=training,
        momentum=p.momentum,
        epsilon=p.epsilon,
    )


class BatchNorm2d(Layer):
    """Batch norm layer; gamma and beta are trainable, running stats are buffers."""

    def __init__(
        self,
        name: str,
        channels: int,
        momentum: float = 0.99,
        epsilon: float = 1e-5,
        precision: Precision = Precision.STANDARD,
    ):
        super().__init__(name)
        self.channels = channels
        self.momentum = momentum
        self.epsilon = epsilon
        dtype = precision.dtype
        self.gamma = Parameter(f"{name}.gamma", np.ones(channels, dtype=dtype), ParamRole.GAMMA)
        self.beta = Parameter(f"{name}.beta", np.zeros(channels, dtype=dtype), ParamRole.BETA)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)

    @property
    def params(self) -> BatchNormParams:
        """View sharing storage with the layer."""
        return BatchNormParams(
            gamma=self.gamma.value,
            beta=self.beta.value,
            running_mean=self.running_mean,
            running_var=self.running_var,
            momentum=self.momentum,
            epsilon=self.epsilon,
        )

    def own_parameters(self) -> List[Parameter]:
        return [self.gamma, self.beta]

    def own_buffers(self) -> List[Tuple[str, np.ndarray]]:
        return [
            (f"{self.name}.running_mean", self.running_mean),
            (f"{self.name}.running_var", self.running_var),
        ]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        if x.shape[1] != self.channels:
            raise ShapeError(f"{self.name}: expected {self.channels} channels, got {x.shape[1]}")
        return F.batch_norm(
            x,
            ctx.param(self.gamma),
            ctx.param(self.beta),
            self.running_mean,
            self.running_var,
            training=ctx.training,
            update_stats=ctx.update_stats,
            momentum=self.momentum,
            epsilon=self.epsilon,
        )
