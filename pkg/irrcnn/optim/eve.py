"""
EVE: Adam with a feedback coefficient driven by the relative change of the objective.

Per update, with the pre-update counter ``t`` starting at 0:

    m <- b1 m + (1 - b1) g            m_hat = m / (1 - b1^(t+1))
    v <- b2 v + (1 - b2) g^2          v_hat = v / (1 - b2^(t+1))
    first update:  d = 1, f_hat = f
    later updates: bounds = [k + 1, K + 1] if f >= f_hat else [1 / (K + 1), 1 / (k + 1)]
                   c = clip(f / f_hat, bounds); f_new = c * f_hat
                   r = |f_new - f_hat| / min(f_new, f_hat)
                   d <- b3 d + (1 - b3) r; f_hat <- f_new
    p <- p - lr / (1 + decay * t) * m_hat / (d * sqrt(v_hat) + eps)
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from irrcnn.autograd.tape import GradMap
from irrcnn.exceptions import NonFiniteError
from irrcnn.optim.base import Optimizer, Params, check_step_inputs
from irrcnn.schemas.training import EveConfig

# A perfectly fitted batch can report a zero loss; the feedback ratio needs a positive one.
OBJECTIVE_FLOOR = 1e-12


@dataclass
class EveState:
    config: EveConfig = field(default_factory=EveConfig)
    step: int = 0
    d: float = 1.0
    f_hat: Optional[float] = None
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def learning_rate(self) -> float:
        return self.config.learning_rate / (1.0 + self.config.decay * self.step)


def _feedback(state: EveState, loss: float) -> None:
    cfg = state.config
    if state.f_hat is None:
        state.d = 1.0
        state.f_hat = loss
        return
    previous = state.f_hat
    if loss >= previous:
        low, high = cfg.lower_threshold + 1.0, cfg.upper_threshold + 1.0
    else:
        low, high = 1.0 / (cfg.upper_threshold + 1.0), 1.0 / (cfg.lower_threshold + 1.0)
    ratio = min(max(loss / previous, low), high)
    current = ratio * previous
    r = abs(current - previous) / min(current, previous)
    state.d = cfg.beta3 * state.d + (1.0 - cfg.beta3) * r
    state.f_hat = current


def eve_step(params: Params, grads: GradMap, loss: float, state: EveState) -> Params:
    """
    One EVE update, in place.

    Raises:
        NonFiniteError: loss or a gradient is NaN or infinite (state untouched)
        ValueError: loss is negative
    """
    if not math.isfinite(loss):
        raise NonFiniteError(f"Non-finite loss {loss}")
    if loss < 0:
        raise ValueError(f"EVE needs a non-negative objective, got {loss}")
    check_step_inputs(params, grads)

    cfg = state.config
    lr_t = state.learning_rate
    _feedback(state, max(loss, OBJECTIVE_FLOOR))
    state.step += 1
    correction1 = 1.0 - cfg.beta1**state.step
    correction2 = 1.0 - cfg.beta2**state.step

    for name, value in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        m, v = state.m[name], state.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        value -= (lr_t * m_hat / (state.d * np.sqrt(v_hat) + cfg.epsilon)).astype(value.dtype)
    return params


class Eve(Optimizer):
    def __init__(self, config: EveConfig):
        self.config = config
        self.state = EveState(config=config)

    def step(self, params: Params, grads: GradMap, loss: float) -> Params:
        return eve_step(params, grads, loss, self.state)

    @property
    def learning_rate(self) -> float:
        return self.state.learning_rate
