"""
Update rules and weight regularization.
"""
from irrcnn.optim.base import Optimizer
from irrcnn.optim.eve import Eve, EveState, eve_step
from irrcnn.optim.regularization import apply_l2, covered_weights, l2_penalty
from irrcnn.optim.sgd import Sgd, SgdState, sgd_momentum_step
from irrcnn.schemas.training import EveConfig, OptimizerName, SgdConfig


def make_optimizer(name: OptimizerName, sgd: SgdConfig, eve: EveConfig) -> Optimizer:
    if OptimizerName(name) == OptimizerName.EVE:
        return Eve(eve)
    return Sgd(sgd)


__all__ = [
    "Eve",
    "EveState",
    "Optimizer",
    "Sgd",
    "SgdState",
    "apply_l2",
    "covered_weights",
    "eve_step",
    "l2_penalty",
    "make_optimizer",
    "sgd_momentum_step",
]
