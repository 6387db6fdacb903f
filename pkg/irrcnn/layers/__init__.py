"""
Parameterized layers.
"""
from irrcnn.layers.base import ForwardContext, Layer, Parameter, ParamRole, WeightSite
from irrcnn.layers.batchnorm import BatchNorm2d, BatchNormParams, batch_norm
from irrcnn.layers.classifier import Classifier, ClassifierParams, classifier_forward
from irrcnn.layers.conv import Conv2d
from irrcnn.layers.dropout import Dropout, dropout
from irrcnn.layers.rcl import (
    RclParams,
    RecurrentConv2d,
    UntiedConvChain,
    rcl_forward,
    unrolled_rcl_forward,
)

__all__ = [
    "BatchNorm2d",
    "BatchNormParams",
    "Classifier",
    "ClassifierParams",
    "Conv2d",
    "Dropout",
    "ForwardContext",
    "Layer",
    "ParamRole",
    "Parameter",
    "RclParams",
    "RecurrentConv2d",
    "UntiedConvChain",
    "WeightSite",
    "batch_norm",
    "classifier_forward",
    "dropout",
    "rcl_forward",
    "unrolled_rcl_forward",
]
