"""
Global-pooled features to class probabilities.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Var
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ArchitectureError, ShapeError
from irrcnn.layers.base import ForwardContext, Layer, Parameter, ParamRole, WeightSite, zeros


@dataclass
class ClassifierParams:
    """Weight matrix (features x K) and optional bias of length K."""

    weight: np.ndarray
    bias: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.weight.ndim != 2:
            raise ShapeError(f"Classifier weight must be a matrix, got shape {self.weight.shape}")
        if self.classes < 2:
            raise ArchitectureError(f"Classifier needs at least 2 classes, got {self.classes}")
        if self.bias is not None and self.bias.shape != (self.classes,):
            raise ShapeError(f"Classifier bias must have shape ({self.classes},)")

    @property
    def features(self) -> int:
        return int(self.weight.shape[0])

    @property
    def classes(self) -> int:
        return int(self.weight.shape[1])


def classifier_forward(features: Var, p: ClassifierParams) -> Var:
    """Softmax rows of ``features @ W + bias`` for features shaped (n, c, 1, 1)."""
    tape = features.tape
    bias = tape.constant(p.bias) if p.bias is not None else None
    logits = F.linear(features, tape.constant(p.weight), bias)
    return F.softmax(logits)


class Classifier(Layer):
    """
    Dense head producing logits; softmax is applied by the caller.

    The logits are reported as an LSUV site so the head is scaled like the
    convolutions.
    """

    def __init__(
        self,
        name: str,
        features: int,
        classes: int,
        precision: Precision = Precision.STANDARD,
    ):
        super().__init__(name)
        if classes < 2:
            raise ArchitectureError(f"{name}: at least 2 classes required, got {classes}")
        self.features = features
        self.classes = classes
        self.weight = Parameter(
            name=f"{name}.weight",
            value=zeros((features, classes), precision),
            role=ParamRole.WEIGHT,
            fan_in=features,
            fan_out=classes,
        )
        self.bias = Parameter(f"{name}.bias", zeros((classes,), precision), ParamRole.BIAS)

    @property
    def params(self) -> ClassifierParams:
        return ClassifierParams(weight=self.weight.value, bias=self.bias.value)

    def own_parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]

    def weight_sites(self) -> List[WeightSite]:
        return [WeightSite(name=self.name, weights=[self.weight])]

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        logits = F.linear(x, ctx.param(self.weight), ctx.param(self.bias))
        ctx.observe(self.name, logits.value)
        return logits
