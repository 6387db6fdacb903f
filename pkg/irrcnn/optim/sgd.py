"""
SGD with momentum and per-update learning-rate decay.
"""
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from irrcnn.autograd.tape import GradMap
from irrcnn.exceptions import NonFiniteError
from irrcnn.optim.base import Optimizer, Params, check_step_inputs
from irrcnn.schemas.training import SgdConfig


@dataclass
class SgdState:
    """Velocity per parameter, update counter and hyperparameters."""

    eta: float = 0.01
    mu: float = 0.9
    decay: float = 9.99e-7
    step: int = 0
    velocity: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def learning_rate(self) -> float:
        return self.eta / (1.0 + self.decay * self.step)


def sgd_momentum_step(params: Params, grads: GradMap, state: SgdState) -> Params:
    """
    One update, in place:

        eta_t = eta / (1 + decay * t)
        v <- mu * v - eta_t * g
        p <- p + v
        t <- t + 1
    """
    check_step_inputs(params, grads)
    eta_t = state.learning_rate
    for name, value in params.items():
        velocity = state.velocity.get(name)
        if velocity is None:
            velocity = state.velocity[name] = np.zeros_like(value)
        velocity *= state.mu
        velocity -= eta_t * grads[name]
        value += velocity
    state.step += 1
    return params


class Sgd(Optimizer):
    def __init__(self, config: SgdConfig):
        self.config = config
        self.state = SgdState(eta=config.learning_rate, mu=config.momentum, decay=config.decay)

    def step(self, params: Params, grads: GradMap, loss: float) -> Params:
        if not np.isfinite(loss):
            raise NonFiniteError(f"Non-finite loss {loss}")
        return sgd_momentum_step(params, grads, self.state)

    @property
    def learning_rate(self) -> float:
        return self.state.learning_rate
