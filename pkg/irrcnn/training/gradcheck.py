"""
Whole-model gradient check against central finite differences.
"""
from typing import List, Optional

import numpy as np
from loguru import logger

from irrcnn.autograd import functional as F
from irrcnn.autograd.gradcheck import GradcheckRow, check_gradients
from irrcnn.autograd.loss import cross_entropy
from irrcnn.autograd.tape import GradMap, Tape, Var, backward
from irrcnn.core.tensor import Precision
from irrcnn.data.synthetic import synthetic_dataset
from irrcnn.init.uniform import init_model
from irrcnn.layers.base import ForwardContext
from irrcnn.models.arch import build_model, miniature_arch
from irrcnn.models.network import Network
from irrcnn.schemas.arch import Activation, Variant

GRADCHECK_BATCH = 4
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_MAX_ELEMENTS = 24


def miniature_model(variant: Variant, seed: int = 0, k: int = 2) -> Network:
    """
    Wide-precision miniature model with ELU activations, initialized from ``seed``.

    ELU keeps the loss smooth so central differences never straddle a kink.
    """
    arch = miniature_arch(variant, k=k, activation=Activation.ELU, precision=Precision.WIDE)
    model = build_model(arch)
    init_model(model, np.random.default_rng(seed))
    return model


def _loss(model: Network, images: np.ndarray, labels: np.ndarray, seed: int) -> Var:
    # Batch statistics without running-stat updates; dropout masks re-drawn
    # from the same seed so every evaluation sees the same function.
    tape = Tape()
    ctx = ForwardContext(
        tape=tape,
        training=True,
        dropout=True,
        update_stats=False,
        rng=np.random.default_rng([seed, 7]),
    )
    logits = model.forward(ctx, model.input(tape, images))
    return cross_entropy(F.softmax(logits), labels)


def check_model_gradients(
    model: Network,
    images: np.ndarray,
    labels: np.ndarray,
    seed: int = 0,
    tolerance: float = GRADCHECK_TOLERANCE,
    max_elements: Optional[int] = GRADCHECK_MAX_ELEMENTS,
) -> List[GradcheckRow]:
    """One row per trainable tensor: worst relative error over the sampled elements."""
    loss = _loss(model, images, labels, seed)
    analytic: GradMap = backward(loss.tape, loss)
    params = {p.name: p.value for p in model.parameters()}

    def evaluate() -> float:
        return float(_loss(model, images, labels, seed).value)

    return check_gradients(evaluate, params, analytic, tolerance, max_elements, seed)


def gradcheck_variant(
    variant: Variant,
    seed: int = 0,
    tolerance: float = GRADCHECK_TOLERANCE,
    max_elements: Optional[int] = GRADCHECK_MAX_ELEMENTS,
    k: int = 2,
) -> List[GradcheckRow]:
    """Gradient check of the miniature ``variant`` on a seeded synthetic batch."""
    model = miniature_model(variant, seed, k)
    _, h, _ = model.arch.input_shape
    data = synthetic_dataset(GRADCHECK_BATCH, model.arch.classes, size=h, seed=seed)
    rows = check_model_gradients(model, data.images, data.labels, seed, tolerance, max_elements)
    failed = [row.name for row in rows if not row.passed]
    if failed:
        logger.warning(f"⚠️ {variant.value}: {len(failed)} over {tolerance}: {failed}")
    else:
        logger.info(f"✅ {variant.value}: all {len(rows)} tensors within {tolerance}")
    return rows
