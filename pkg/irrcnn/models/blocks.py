"""
Inception-recurrent-residual blocks, transition blocks and the stem unit.

Block layout (one stage):

    x ──┬── 1x1 RCL ──────────────────┐
        ├── 3x3 RCL ──────────────────┼── concat ──(+ x)── batch norm
        └── avg pool 3x3 -> 1x1 conv ─┘

The equivalent networks swap each RCL for an untied chain of ``k + 1``
convolutions; the non-residual variants drop the ``+ x``.
"""
from typing import List, Literal, Optional, Tuple

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.core.ops import output_hw
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ShapeError
from irrcnn.layers.base import ForwardContext, Layer
from irrcnn.layers.batchnorm import BatchNorm2d
from irrcnn.layers.conv import Conv2d
from irrcnn.layers.dropout import Dropout
from irrcnn.layers.rcl import RecurrentConv2d, UntiedConvChain
from irrcnn.schemas.arch import InceptionUnitSpec, TransitionSpec, Variant

Mode = Literal["train", "infer"]


def mode_context(x: Var, mode: Mode, rng: Optional[np.random.Generator] = None) -> ForwardContext:
    """Forward context on ``x``'s tape for a train/infer mode string."""
    if mode == "train":
        return ForwardContext.train(x.tape, rng if rng is not None else np.random.default_rng(0))
    if mode == "infer":
        return ForwardContext.infer(x.tape)
    raise ValueError(f"Unknown mode: {mode!r}")


class ConvBnAct(Layer):
    """3x3 convolution, batch norm, activation. Used for the stem."""

    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        activation: str = "relu",
        precision: Precision = Precision.STANDARD,
        bn_momentum: float = 0.99,
        bn_epsilon: float = 1e-5,
    ):
        super().__init__(name)
        self.activation = activation
        self.conv = Conv2d(f"{name}.conv", c_in, c_out, 3, precision=precision)
        self.bn = BatchNorm2d(f"{name}.bn", c_out, bn_momentum, bn_epsilon, precision)

    def children(self) -> List[Layer]:
        return [self.conv, self.bn]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        return F.activation(self.bn.forward(ctx, self.conv.forward(ctx, x)), self.activation)


class PoolProjection(Layer):
    """Pooling branch: same-padded 3x3 average pool, 1x1 convolution, activation."""

    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        activation: str = "relu",
        precision: Precision = Precision.STANDARD,
        regularized: bool = True,
    ):
        super().__init__(name)
        self.activation = activation
        self.conv = Conv2d(
            f"{name}.conv", c_in, c_out, 1, precision=precision, regularized=regularized
        )

    def children(self) -> List[Layer]:
        return [self.conv]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        pooled = F.avg_pool(x, (3, 3), (1, 1), "same")
        return F.activation(self.conv.forward(ctx, pooled), self.activation)


class InceptionUnit(Layer):
    """Three parallel branches concatenated along channels."""

    def __init__(
        self,
        name: str,
        spec: InceptionUnitSpec,
        recurrent: bool = True,
        precision: Precision = Precision.STANDARD,
    ):
        super().__init__(name)
        self.spec = spec
        self.recurrent = recurrent
        c_1x1, c_3x3, c_pool = spec.alloc
        act = spec.activation.value
        branch = RecurrentConv2d if recurrent else UntiedConvChain
        self.branch_1x1 = branch(
            f"{name}.branch1x1", spec.c_in, c_1x1, 1, spec.k, act, precision, regularized=True
        )
        self.branch_3x3 = branch(
            f"{name}.branch3x3", spec.c_in, c_3x3, 3, spec.k, act, precision, regularized=True
        )
        self.branch_pool = PoolProjection(f"{name}.branch_pool", spec.c_in, c_pool, act, precision)

    def children(self) -> List[Layer]:
        return [self.branch_1x1, self.branch_3x3, self.branch_pool]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        if x.shape[1] != self.spec.c_in:
            raise ShapeError(f"{self.name}: expected {self.spec.c_in} channels, got {x.shape[1]}")
        return F.concat_channels(
            [
                self.branch_1x1.forward(ctx, x),
                self.branch_3x3.forward(ctx, x),
                self.branch_pool.forward(ctx, x),
            ]
        )


class IrrcnnBlock(Layer):
    """Inception unit, optional residual add, batch norm."""

    def __init__(
        self,
        name: str,
        spec: InceptionUnitSpec,
        variant: Variant = Variant.IRRCNN,
        precision: Precision = Precision.STANDARD,
        bn_momentum: float = 0.99,
        bn_epsilon: float = 1e-5,
    ):
        super().__init__(name)
        self.variant = variant
        self.residual = variant.residual
        self.unit = InceptionUnit(f"{name}.unit", spec, variant.recurrent, precision)
        self.bn = BatchNorm2d(f"{name}.bn", spec.c_in, bn_momentum, bn_epsilon, precision)

    def children(self) -> List[Layer]:
        return [self.unit, self.bn]

    def pre_bn(self, ctx: ForwardContext, x: Var) -> Var:
        """Block output before batch norm: ``x + F(x)`` or ``F(x)``."""
        transformed = self.unit.forward(ctx, x)
        return F.add(x, transformed) if self.residual else transformed

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        return self.bn.forward(ctx, self.pre_bn(ctx, x))


class TransitionBlock(Layer):
    """3x3 convolution, activation, optional 3x3/2 max pool, dropout."""

    def __init__(self, name: str, spec: TransitionSpec, precision: Precision = Precision.STANDARD):
        super().__init__(name)
        self.spec = spec
        self.conv = Conv2d(f"{name}.conv", spec.c_in, spec.c_out, 3, precision=precision)
        self.dropout = Dropout(f"{name}.dropout", spec.dropout_rate)

    def children(self) -> List[Layer]:
        return [self.conv, self.dropout]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        y = F.activation(self.conv.forward(ctx, x), self.spec.activation.value)
        if self.spec.pool:
            y = F.max_pool(y, (3, 3), (2, 2))
        return self.dropout.forward(ctx, y)

    def output_hw(self, h: int, w: int) -> Tuple[int, int]:
        if not self.spec.pool:
            return h, w
        return output_hw(h, w, 3, 2, "valid")


def ircnn_unit_forward(
    x: Var, unit: InceptionUnit, mode: Mode = "infer", rng: Optional[np.random.Generator] = None
) -> Var:
    """Concatenated branch outputs; same shape as ``x``."""
    return unit.forward(mode_context(x, mode, rng), x)


def irrcnn_block_forward(
    x: Var, block: IrrcnnBlock, mode: Mode = "infer", rng: Optional[np.random.Generator] = None
) -> Var:
    """Batch-normalized ``x + unit(x)`` (``unit(x)`` for the non-residual variants)."""
    return block.forward(mode_context(x, mode, rng), x)


def transition_forward(
    x: Var,
    transition: TransitionBlock,
    mode: Mode = "infer",
    rng: Optional[np.random.Generator] = None,
) -> Var:
    """Conv, activation, optional pool and dropout (inert in infer mode)."""
    return transition.forward(mode_context(x, mode, rng), x)
