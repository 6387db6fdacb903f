"""
Tensor type and numeric kernels.
"""
from irrcnn.core.ops import (
    ConvKernel,
    add,
    avg_pool,
    concat_channels,
    conv2d,
    conv2d_oracle,
    elu,
    global_avg_pool,
    max_pool,
    relu,
    softmax,
)
from irrcnn.core.tensor import Precision, Tensor, tensor

__all__ = [
    "ConvKernel",
    "Precision",
    "Tensor",
    "add",
    "avg_pool",
    "concat_channels",
    "conv2d",
    "conv2d_oracle",
    "elu",
    "global_avg_pool",
    "max_pool",
    "relu",
    "softmax",
    "tensor",
]
