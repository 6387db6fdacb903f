"""
Reverse-mode differentiation over the tensor kernels.
"""
from irrcnn.autograd.gradcheck import GradcheckRow, check_gradients, finite_diff
from irrcnn.autograd.loss import cross_entropy
from irrcnn.autograd.tape import GradMap, Node, Tape, Var, backward, merge_grads

__all__ = [
    "GradMap",
    "GradcheckRow",
    "Node",
    "Tape",
    "Var",
    "backward",
    "check_gradients",
    "cross_entropy",
    "finite_diff",
    "merge_grads",
]
