"""
Plain convolution layer.
"""
from typing import List, Tuple

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.core.ops import Padding, output_hw
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ArchitectureError
from irrcnn.layers.base import ForwardContext, Layer, Parameter, ParamRole, WeightSite, zeros

SUPPORTED_KERNELS = (1, 3)


def conv_parameters(
    name: str,
    c_in: int,
    c_out: int,
    kernel: int,
    precision: Precision,
    regularized: bool = False,
) -> Tuple[Parameter, Parameter]:
    """Weight (c_out, c_in, k, k) and bias (c_out,) for a convolution."""
    if kernel not in SUPPORTED_KERNELS:
        raise ArchitectureError(f"{name}: only 1x1 and 3x3 kernels are supported, got {kernel}")
    weight = Parameter(
        name=f"{name}.weight",
        value=zeros((c_out, c_in, kernel, kernel), precision),
        role=ParamRole.WEIGHT,
        fan_in=c_in * kernel * kernel,
        fan_out=c_out * kernel * kernel,
        regularized=regularized,
    )
    bias = Parameter(name=f"{name}.bias", value=zeros((c_out,), precision), role=ParamRole.BIAS)
    return weight, bias


class Conv2d(Layer):
    """Convolution with bias; reports its output as an LSUV site."""

    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        kernel: int = 3,
        stride: int = 1,
        padding: Padding = "same",
        precision: Precision = Precision.STANDARD,
        regularized: bool = False,
    ):
        super().__init__(name)
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.weight, self.bias = conv_parameters(name, c_in, c_out, kernel, precision, regularized)

    def own_parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]

    def weight_sites(self) -> List[WeightSite]:
        return [WeightSite(name=self.name, weights=[self.weight])]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        out = F.conv2d(x, ctx.param(self.weight), ctx.param(self.bias), self.stride, self.padding)
        ctx.observe(self.name, out.value)
        return out

    def output_hw(self, h: int, w: int) -> Tuple[int, int]:
        return output_hw(h, w, self.kernel, self.stride, self.padding)
