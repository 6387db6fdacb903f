"""
Recurrent convolutional layer and its untied sequential counterpart.

The recurrence, for time steps t = 0..k with weights shared across steps:

    y(0) = act(conv(x, w_f) + b)
    y(t) = act(conv(x, w_f) + b + conv(y(t-1), w_r))

The feed-forward term is computed once and reused at every step. ``k = 2``
therefore records three convolution nodes on the tape.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.core.tensor import Precision, check_rank4
from irrcnn.exceptions import ShapeError
from irrcnn.layers.base import ForwardContext, Layer, Parameter, ParamRole, WeightSite, zeros
from irrcnn.layers.conv import Conv2d, conv_parameters


@dataclass
class RclParams:
    """Feed-forward kernel, recurrent kernel, shared bias and step count."""

    w_f: np.ndarray
    w_r: np.ndarray
    bias: np.ndarray
    k: int

    def __post_init__(self) -> None:
        f, _, kh, kw = check_rank4(self.w_f, "w_f")
        rf, rc, rkh, rkw = check_rank4(self.w_r, "w_r")
        if rc != f:
            raise ShapeError(f"Recurrent kernel consumes {rc} channels but the layer emits {f}")
        if (rf, rkh, rkw) != (f, kh, kw):
            raise ShapeError(
                f"Recurrent kernel shape {self.w_r.shape} does not match w_f {self.w_f.shape}"
            )
        if self.bias.shape != (f,):
            raise ShapeError(f"Bias must have shape ({f},), got {self.bias.shape}")
        if self.k < 0:
            raise ValueError(f"Time steps must be non-negative, got {self.k}")

    @property
    def param_count(self) -> int:
        return int(self.w_f.size + self.w_r.size + self.bias.size)


def rcl_forward(
    x: Var,
    w_f: Var,
    w_r: Var,
    bias: Var,
    k: int,
    activation: str = "relu",
    observe: Optional[Callable[[np.ndarray], None]] = None,
) -> Var:
    """
    Unroll the recurrence for ``k`` steps with tied weights.

    Args:
        x: Input (n, c, h, w)
        w_f: Feed-forward kernel (f, c, kh, kw)
        w_r: Recurrent kernel (f, f, kh, kw)
        bias: Shared bias (f,)
        k: Number of recurrent steps after the feed-forward pass
        activation: "relu" or "elu", applied at every step
        observe: Called with the step-k pre-activation

    Returns:
        y(k), shape (n, f, h, w)
    """
    f = w_f.shape[0]
    if w_r.shape[1] != f or w_r.shape[0] != f:
        raise ShapeError(f"Recurrent kernel {w_r.shape} does not match {f} output channels")
    feedforward = F.conv2d(x, w_f, bias, stride=1, padding="same")
    pre = feedforward
    y = F.activation(pre, activation)
    for _ in range(k):
        pre = F.add(feedforward, F.conv2d(y, w_r, None, stride=1, padding="same"))
        y = F.activation(pre, activation)
    if observe is not None:
        observe(pre.value)
    return y


def unrolled_rcl_forward(
    x: Var,
    w_f: Var,
    recurrent: Sequence[Var],
    bias: Var,
    activation: str = "relu",
) -> Var:
    """
    Explicit chain of ``len(recurrent) + 1`` convolutions wired like the recurrence.

    Passing the same kernel for every step reproduces ``rcl_forward``; distinct
    kernels give the untied version of the same wiring.
    """
    feedforward = F.conv2d(x, w_f, bias, stride=1, padding="same")
    y = F.activation(feedforward, activation)
    for kernel in recurrent:
        recurrent_term = F.conv2d(y, kernel, None, stride=1, padding="same")
        y = F.activation(F.add(feedforward, recurrent_term), activation)
    return y


class RecurrentConv2d(Layer):
    """Recurrent convolutional layer with same padding and stride 1."""

    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        kernel: int,
        k: int,
        activation: str = "relu",
        precision: Precision = Precision.STANDARD,
        regularized: bool = False,
    ):
        super().__init__(name)
        if k < 0:
            raise ValueError(f"{name}: time steps must be non-negative, got {k}")
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self.k = k
        self.activation = activation
        self.w_f, self.bias = conv_parameters(
            f"{name}.feedforward", c_in, c_out, kernel, precision, regularized
        )
        self.bias.name = f"{name}.bias"
        self.w_r = Parameter(
            name=f"{name}.recurrent.weight",
            value=zeros((c_out, c_out, kernel, kernel), precision),
            role=ParamRole.WEIGHT,
            fan_in=c_out * kernel * kernel,
            fan_out=c_out * kernel * kernel,
            regularized=regularized,
        )

    @property
    def params(self) -> RclParams:
        return RclParams(w_f=self.w_f.value, w_r=self.w_r.value, bias=self.bias.value, k=self.k)

    def own_parameters(self) -> List[Parameter]:
        return [self.w_f, self.w_r, self.bias]

    def weight_sites(self) -> List[WeightSite]:
        return [WeightSite(name=self.name, weights=[self.w_f, self.w_r])]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        if x.shape[1] != self.c_in:
            raise ShapeError(f"{self.name}: expected {self.c_in} channels, got {x.shape[1]}")
        return rcl_forward(
            x,
            ctx.param(self.w_f),
            ctx.param(self.w_r),
            ctx.param(self.bias),
            self.k,
            self.activation,
            observe=lambda value: ctx.observe(self.name, value),
        )


class UntiedConvChain(Layer):
    """
    ``k + 1`` sequential same-shape convolutions with their own weights.

    This is the equivalent-network replacement for an RCL: same kernel size,
    same number of convolution applications, no weight tying and no
    feed-forward re-injection.
    """

    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        kernel: int,
        k: int,
        activation: str = "relu",
        precision: Precision = Precision.STANDARD,
        regularized: bool = False,
    ):
        super().__init__(name)
        if k < 0:
            raise ValueError(f"{name}: time steps must be non-negative, got {k}")
        self.k = k
        self.activation = activation
        self.convs = [
            Conv2d(
                f"{name}.step{t}",
                c_in if t == 0 else c_out,
                c_out,
                kernel,
                precision=precision,
                regularized=regularized,
            )
            for t in range(k + 1)
        ]

    def children(self) -> List[Layer]:
        return list(self.convs)

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        y = x
        for conv in self.convs:
            y = F.activation(conv.forward(ctx, y), self.activation)
        return y

