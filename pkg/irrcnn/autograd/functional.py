"""
Differentiable operations recorded on a ``Tape``.

Each function computes its value with the kernels in ``irrcnn.core.ops`` and
records the matching backward rule.
"""
from typing import List, Optional, Sequence

import numpy as np

from irrcnn.autograd.tape import Var
from irrcnn.core import ops
from irrcnn.core.ops import Padding, PairLike
from irrcnn.core.tensor import check_rank4, check_same_shape
from irrcnn.exceptions import ShapeError


def conv2d(
    x: Var,
    weight: Var,
    bias: Optional[Var] = None,
    stride: PairLike = 1,
    padding: Padding = "same",
) -> Var:
    tape = x.tape
    bias_value = None if bias is None else bias.value
    value = ops.conv2d(x.value, weight.value, bias_value, stride, padding)
    x_value, w_value = x.value, weight.value

    def _backward(grad: np.ndarray) -> List[Optional[np.ndarray]]:
        dx, dw, db = ops.conv2d_backward(grad, x_value, w_value, stride, padding)
        grads: List[Optional[np.ndarray]] = [dx, dw]
        if bias is not None:
            grads.append(db)
        return grads

    inputs = [x, weight] if bias is None else [x, weight, bias]
    return tape.apply("conv2d", inputs, value, _backward)


def max_pool(x: Var, window: PairLike = (3, 3), stride: PairLike = (2, 2)) -> Var:
    value = ops.max_pool(x.value, window, stride)
    x_value = x.value
    return x.tape.apply(
        "max_pool",
        [x],
        value,
        lambda grad: [ops.max_pool_backward(grad, x_value, window, stride)],
    )


def avg_pool(
    x: Var,
    window: PairLike = (3, 3),
    stride: PairLike = (1, 1),
    padding: Padding = "same",
) -> Var:
    value = ops.avg_pool(x.value, window, stride, padding)
    shape = x.shape
    return x.tape.apply(
        "avg_pool",
        [x],
        value,
        lambda grad: [ops.avg_pool_backward(grad, shape, window, stride, padding)],
    )


def global_avg_pool(x: Var) -> Var:
    value = ops.global_avg_pool(x.value)
    shape = x.shape
    return x.tape.apply(
        "global_avg_pool",
        [x],
        value,
        lambda grad: [ops.global_avg_pool_backward(grad, shape)],
    )


def concat_channels(parts: Sequence[Var]) -> Var:
    if not parts:
        raise ShapeError("concat_channels needs at least one part")
    value = ops.concat_channels([p.value for p in parts])
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def _backward(grad: np.ndarray) -> List[Optional[np.ndarray]]:
        return [grad[:, bounds[i] : bounds[i + 1]] for i in range(len(parts))]

    return parts[0].tape.apply("concat_channels", list(parts), value, _backward)


def add(a: Var, b: Var) -> Var:
    value = ops.add(a.value, b.value)
    return a.tape.apply("add", [a, b], value, lambda grad: [grad, grad])


def mul(a: Var, b: Var) -> Var:
    check_same_shape(a.value, b.value, "mul operands")
    a_value, b_value = a.value, b.value
    return a.tape.apply(
        "mul",
        [a, b],
        a_value * b_value,
        lambda grad: [grad * b_value, grad * a_value],
    )


def total(x: Var) -> Var:
    """Sum of all elements as a shape-() scalar."""
    shape = x.shape
    value = np.asarray(x.value.sum(), dtype=x.dtype)
    return x.tape.apply(
        "sum",
        [x],
        value,
        lambda grad: [np.full(shape, grad, dtype=grad.dtype)],
    )


def relu(x: Var) -> Var:
    x_value = x.value
    return x.tape.apply(
        "relu", [x], ops.relu(x_value), lambda grad: [ops.relu_backward(grad, x_value)]
    )


def elu(x: Var, alpha: float = 1.0) -> Var:
    x_value = x.value
    return x.tape.apply(
        "elu",
        [x],
        ops.elu(x_value, alpha),
        lambda grad: [ops.elu_backward(grad, x_value, alpha)],
    )


def activation(x: Var, name: str) -> Var:
    """Apply an activation by name ("relu" or "elu")."""
    if name == "relu":
        return relu(x)
    if name == "elu":
        return elu(x)
    raise ValueError(f"Unknown activation: {name!r}")


def batch_norm(
    x: Var,
    gamma: Var,
    beta: Var,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    update_stats: bool,
    momentum: float = 0.99,
    epsilon: float = 1e-5,
) -> Var:
    """
    Per-channel batch normalization over (n, h, w).

    In training mode batch statistics normalize the input and, when
    ``update_stats`` is set, the running buffers are updated in place as
    ``running = momentum * running + (1 - momentum) * batch``.
    """
    _, c, _, _ = check_rank4(x.value)
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"Batch norm expects {c} channels, got gamma {gamma.shape}")
    g4 = gamma.value.reshape(1, c, 1, 1)
    b4 = beta.value.reshape(1, c, 1, 1)

    if training:
        mean = x.value.mean(axis=(0, 2, 3))
        var = x.value.var(axis=(0, 2, 3))
        if update_stats:
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mean
            running_var *= momentum
            running_var += (1.0 - momentum) * var
    else:
        mean = running_mean.astype(x.dtype, copy=False)
        var = running_var.astype(x.dtype, copy=False)

    inv_std = (1.0 / np.sqrt(var + epsilon)).astype(x.dtype).reshape(1, c, 1, 1)
    x_hat = (x.value - mean.reshape(1, c, 1, 1)) * inv_std
    value = g4 * x_hat + b4
    count = x.value.size // c

    def _backward(grad: np.ndarray) -> List[Optional[np.ndarray]]:
        dgamma = (grad * x_hat).sum(axis=(0, 2, 3))
        dbeta = grad.sum(axis=(0, 2, 3))
        dx_hat = grad * g4
        if training:
            dx = (
                inv_std
                / count
                * (
                    count * dx_hat
                    - dx_hat.sum(axis=(0, 2, 3), keepdims=True)
                    - x_hat * (dx_hat * x_hat).sum(axis=(0, 2, 3), keepdims=True)
                )
            )
        else:
            dx = dx_hat * inv_std
        return [dx, dgamma, dbeta]

    return x.tape.apply("batch_norm", [x, gamma, beta], value, _backward)


def dropout(x: Var, rate: float, active: bool, rng: Optional[np.random.Generator]) -> Var:
    """
    Inverted dropout; the mask is captured by the backward rule.

    Inactive (inference) or zero-rate dropout returns ``x`` itself.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"Dropout rate must be in [0, 1), got {rate}")
    if not active or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("Active dropout needs a random generator")
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x.tape.apply("dropout", [x], x.value * keep, lambda grad: [grad * keep])


def linear(x: Var, weight: Var, bias: Optional[Var] = None) -> Var:
    """
    Dense layer on flattened features.

    Args:
        x: Features (n, c, 1, 1) or (n, c)
        weight: (c, K) matrix
        bias: Optional length-K bias

    Returns:
        Logits (n, K)
    """
    n = x.shape[0]
    flat = x.value.reshape(n, -1)
    if flat.shape[1] != weight.shape[0]:
        raise ShapeError(
            f"Feature length {flat.shape[1]} does not match classifier rows {weight.shape[0]}"
        )
    value = flat @ weight.value
    if bias is not None:
        value = value + bias.value
    in_shape = x.shape
    w_value = weight.value

    def _backward(grad: np.ndarray) -> List[Optional[np.ndarray]]:
        grads: List[Optional[np.ndarray]] = [(grad @ w_value.T).reshape(in_shape), flat.T @ grad]
        if bias is not None:
            grads.append(grad.sum(axis=0))
        return grads

    inputs = [x, weight] if bias is None else [x, weight, bias]
    return x.tape.apply("linear", inputs, value, _backward)


def softmax(logits: Var) -> Var:
    probs = ops.softmax(logits.value, axis=1)
    return logits.tape.apply(
        "softmax",
        [logits],
        probs,
        lambda grad: [ops.softmax_backward(grad, probs, axis=1)],
    )
