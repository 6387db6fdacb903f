"""
Parameter initialization.
"""
from typing import List

import numpy as np

from irrcnn.init.lsuv import lsuv_init, site_variance
from irrcnn.init.uniform import init_model, scaled_uniform_init
from irrcnn.models.network import Network
from irrcnn.schemas.training import InitConfig, InitScheme, LsuvReportRow


def initialize(
    model: Network, cfg: InitConfig, probe: np.ndarray, seed: int = 0
) -> List[LsuvReportRow]:
    """
    Scaled-uniform seeding, followed by LSUV when ``cfg.scheme`` asks for it.

    Weights are drawn from ``cfg.seed`` when it is set, otherwise from ``seed``
    (the run seed).
    """
    weight_seed = cfg.seed if cfg.seed is not None else seed
    init_model(model, np.random.default_rng(weight_seed))
    if cfg.scheme == InitScheme.LSUV:
        return lsuv_init(model, probe[: cfg.probe_size], cfg)
    return []


__all__ = ["init_model", "initialize", "lsuv_init", "scaled_uniform_init", "site_variance"]
