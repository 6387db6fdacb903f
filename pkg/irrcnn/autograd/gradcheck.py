"""
Finite-difference gradient oracle.
"""
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from irrcnn.autograd.tape import GradMap

# Gradients smaller than this are compared in absolute terms.
GRAD_FLOOR = 1e-5


class GradcheckRow(BaseModel):
    """Worst relative error found for one parameter tensor."""

    name: str = Field(..., description="Parameter name")
    checked: int = Field(..., ge=0, description="Number of elements compared")
    worst_relative_error: float = Field(..., ge=0.0)
    passed: bool


def finite_diff(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    eps: Optional[float] = None,
    indices: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Central-difference gradient estimate of a scalar function.

    ``x`` is perturbed in place and restored after each evaluation, so ``f``
    may read it through a closure (a model parameter) or through its argument.

    Args:
        f: Deterministic scalar function
        x: Point to differentiate at
        eps: Fixed step; by default ``1e-5 * max(1, |x_i|)`` per element
        indices: Flat indices to estimate; all elements when omitted

    Returns:
        Gradient estimate shaped like ``x`` (zeros at skipped indices)
    """
    if eps is not None and eps <= 0:
        raise ValueError("eps must be positive")
    grad = np.zeros(x.shape, dtype=np.float64)
    if not x.flags.c_contiguous or not x.flags.writeable:
        raise ValueError("finite_diff needs a writeable contiguous array it can perturb in place")
    flat = x.reshape(-1)
    targets = range(flat.size) if indices is None else indices
    for i in targets:
        original = flat[i]
        step = eps if eps is not None else 1e-5 * max(1.0, abs(float(original)))
        flat[i] = original + step
        upper = float(f(x))
        flat[i] = original - step
        lower = float(f(x))
        flat[i] = original
        grad.reshape(-1)[i] = (upper - lower) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """Elementwise |a - n| / max(|a|, |n|, GRAD_FLOOR)."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), GRAD_FLOOR)
    return np.abs(analytic - numeric) / scale


def check_gradients(
    loss_fn: Callable[[], float],
    params: Dict[str, np.ndarray],
    analytic: GradMap,
    tolerance: float = 1e-4,
    max_elements: Optional[int] = None,
    seed: int = 0,
) -> List[GradcheckRow]:
    """
    Compare backward gradients against central differences per parameter.

    Args:
        loss_fn: Re-evaluates the loss from the current parameter values
        params: Parameter arrays, perturbed in place
        analytic: Gradients from ``backward``
        tolerance: Maximum accepted relative error
        max_elements: Seeded sample size per tensor; all elements when None
        seed: Sampling seed

    Returns:
        One row per parameter, in ``params`` order
    """
    rng = np.random.default_rng(seed)
    rows = []
    for name, value in params.items():
        size = value.size
        if max_elements is None or size <= max_elements:
            indices = np.arange(size)
        else:
            indices = np.sort(rng.choice(size, size=max_elements, replace=False))
        numeric = finite_diff(lambda _: loss_fn(), value, indices=indices)
        errors = relative_error(
            analytic[name].reshape(-1)[indices].astype(np.float64),
            numeric.reshape(-1)[indices],
        )
        worst = float(errors.max()) if errors.size else 0.0
        rows.append(
            GradcheckRow(
                name=name,
                checked=int(indices.size),
                worst_relative_error=worst,
                passed=worst <= tolerance,
            )
        )
    return rows
