"""
Layer-sequential unit-variance initialization.

Weight sites are visited in forward order. For each one the probe batch is
pushed through the (already initialized) earlier layers up to the site, the
variance of the site's output is measured and the site's weights are scaled
by ``1 / sqrt(variance)`` until the variance is within ``tol_var`` of one.

Earlier top-level layers are fixed once their sites are fitted, so the probe
activation at the input of the layer owning the current site is cached and
each measurement only replays that layer up to the site.
"""
import math
from typing import List

import numpy as np
from loguru import logger

from irrcnn.autograd.tape import Tape
from irrcnn.exceptions import LsuvError
from irrcnn.layers.base import ForwardContext, WeightSite
from irrcnn.models.network import Network
from irrcnn.schemas.training import InitConfig, LsuvReportRow


class _SiteReached(Exception):
    def __init__(self, value: np.ndarray):
        super().__init__()
        self.value = value


def _variance_from(model: Network, x: np.ndarray, start: int, site: str) -> float:
    def stop_at_site(name: str, value: np.ndarray) -> None:
        if name == site:
            raise _SiteReached(value)

    ctx = ForwardContext.probe(observer=stop_at_site)
    try:
        model.run_layers(ctx, ctx.tape.constant(x), start)
    except _SiteReached as reached:
        return float(np.var(reached.value, dtype=np.float64))
    raise LsuvError(site, "the forward pass never reached this layer")


def site_variance(model: Network, probe: np.ndarray, site: str) -> float:
    """
    Variance over all elements of ``site``'s output on ``probe``.

    Batch norm uses batch statistics and leaves its running buffers alone;
    dropout is off.
    """
    return _variance_from(model, model.input(Tape(record=False), probe).value, 0, site)


def _advance(model: Network, x: np.ndarray, start: int, stop: int) -> np.ndarray:
    ctx = ForwardContext.probe()
    return model.run_layers(ctx, ctx.tape.constant(x), start, stop).value


def _check_variance(site: str, variance: float) -> None:
    if not math.isfinite(variance) or variance <= 0.0:
        raise LsuvError(site, f"output variance is {variance}; the probe or the layer is dead")


def _rescale(site: WeightSite, factor: float) -> None:
    for weight in site.weights:
        weight.value *= weight.value.dtype.type(factor)


def lsuv_init(model: Network, probe: np.ndarray, cfg: InitConfig) -> List[LsuvReportRow]:
    """
    Rescale each weight site of an initialized model to unit output variance.

    Args:
        model: Model already seeded by ``init_model``
        probe: Image batch (n, c, h, w)
        cfg: Tolerance and iteration cap

    Returns:
        One report row per site, in forward order

    Raises:
        LsuvError: a site's output variance is zero or not finite
    """
    report = []
    boundary = model.input(Tape(record=False), probe).value
    start = 0
    for site in model.weight_sites():
        owner = model.owner_index(site.name)
        if owner > start:
            boundary = _advance(model, boundary, start, owner)
            start = owner

        variance = _variance_from(model, boundary, start, site.name)
        _check_variance(site.name, variance)
        iterations = 0
        while abs(variance - 1.0) > cfg.tol_var and iterations < cfg.max_iterations:
            _rescale(site, 1.0 / math.sqrt(variance))
            iterations += 1
            variance = _variance_from(model, boundary, start, site.name)
            _check_variance(site.name, variance)

        converged = abs(variance - 1.0) <= cfg.tol_var
        row = LsuvReportRow(
            layer=site.name, iterations=iterations, variance=variance, converged=converged
        )
        if converged:
            logger.debug(f"LSUV {site.name}: variance {variance:.4f} after {iterations} rescales")
        else:
            logger.warning(
                f"⚠️ LSUV {site.name} did not converge: variance {variance:.4f} "
                f"after {iterations} rescales"
            )
        report.append(row)

    flagged = sum(not row.converged for row in report)
    logger.info(f"✅ LSUV fitted {len(report)} layers ({flagged} not converged)")
    return report
