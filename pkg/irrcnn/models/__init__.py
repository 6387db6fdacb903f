"""
Blocks, whole networks and the named architectures.
"""
from irrcnn.models.arch import (
    arch_param_count,
    build_equivalent,
    build_model,
    calibrate_width,
    cifar_arch,
    desk_arch,
    miniature_arch,
    param_count,
    parity_report,
)
from irrcnn.models.blocks import (
    ConvBnAct,
    InceptionUnit,
    IrrcnnBlock,
    PoolProjection,
    TransitionBlock,
    ircnn_unit_forward,
    irrcnn_block_forward,
    transition_forward,
)
from irrcnn.models.network import Network

__all__ = [
    "ConvBnAct",
    "InceptionUnit",
    "IrrcnnBlock",
    "Network",
    "PoolProjection",
    "TransitionBlock",
    "arch_param_count",
    "build_equivalent",
    "build_model",
    "calibrate_width",
    "cifar_arch",
    "desk_arch",
    "ircnn_unit_forward",
    "irrcnn_block_forward",
    "miniature_arch",
    "param_count",
    "parity_report",
    "transition_forward",
]
