"""
Numeric kernels on (n, c, h, w) tensors.

Forward kernels are pure functions. Every differentiable kernel has a matching
``*_backward`` that the autograd layer calls with the saved forward inputs.

Convolution is cross-correlation (no kernel flip). The fast path lowers the
input to a patch matrix and runs one dense product per batch chunk;
``conv2d_oracle`` is the nested-loop reference it is tested against.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Literal, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from irrcnn.core.tensor import Tensor, check_rank4, check_same_shape, pair
from irrcnn.exceptions import ShapeError

Padding = Literal["valid", "same"]
PairLike = int | Tuple[int, int]

# Upper bound on patch-matrix elements materialized at once.
_PATCH_BUDGET = 1 << 23


@dataclass(frozen=True)
class ConvKernel:
    """Convolution weights (f, c, kh, kw) plus a length-f bias."""

    weights: np.ndarray
    bias: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        check_rank4(self.weights, "kernel weights")
        f = self.weights.shape[0]
        if self.bias is not None and self.bias.shape != (f,):
            raise ShapeError(f"Bias must have shape ({f},), got {self.bias.shape}")

    @property
    def out_channels(self) -> int:
        return int(self.weights.shape[0])

    @property
    def in_channels(self) -> int:
        return int(self.weights.shape[1])

    @property
    def size(self) -> Tuple[int, int]:
        return int(self.weights.shape[2]), int(self.weights.shape[3])


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def pad_amounts(
    h: int,
    w: int,
    kernel: PairLike,
    stride: PairLike,
    padding: Padding,
) -> Tuple[int, int, int, int]:
    """
    Zero padding (top, bottom, left, right) for a window operation.

    "same" keeps ceil(size / stride) outputs; an odd total puts the extra row
    or column on the bottom/right.
    """
    kh, kw = pair(kernel)
    sh, sw = pair(stride)
    if padding == "valid":
        return 0, 0, 0, 0
    if padding != "same":
        raise ValueError(f"Unknown padding: {padding!r}")
    oh = -(-h // sh)
    ow = -(-w // sw)
    ph = max((oh - 1) * sh + kh - h, 0)
    pw = max((ow - 1) * sw + kw - w, 0)
    return ph // 2, ph - ph // 2, pw // 2, pw - pw // 2


def output_hw(
    h: int,
    w: int,
    kernel: PairLike,
    stride: PairLike,
    padding: Padding,
) -> Tuple[int, int]:
    """Spatial output size of a window operation; raises on empty output."""
    kh, kw = pair(kernel)
    sh, sw = pair(stride)
    if sh < 1 or sw < 1:
        raise ValueError(f"Stride components must be >= 1, got {(sh, sw)}")
    top, bottom, left, right = pad_amounts(h, w, kernel, stride, padding)
    hp, wp = h + top + bottom, w + left + right
    if hp < kh or wp < kw:
        raise ShapeError(
            f"Spatial dims {(h, w)} too small for window {(kh, kw)} with {padding} padding"
        )
    return (hp - kh) // sh + 1, (wp - kw) // sw + 1


def _pad(x: np.ndarray, amounts: Tuple[int, int, int, int]) -> np.ndarray:
    top, bottom, left, right = amounts
    if not any(amounts):
        return x
    return np.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right)))


def _windows(
    xp: np.ndarray,
    kh: int,
    kw: int,
    sh: int,
    sw: int,
    oh: int,
    ow: int,
) -> np.ndarray:
    """Strided (n, c, oh, ow, kh, kw) view over a padded input."""
    view = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    return view[:, :, : (oh - 1) * sh + 1 : sh, : (ow - 1) * sw + 1 : sw]


def _scatter_windows(
    target: np.ndarray,
    values: np.ndarray,
    kh: int,
    kw: int,
    sh: int,
    sw: int,
    oh: int,
    ow: int,
) -> None:
    """Add (n, c, kh, kw, oh, ow) window contributions back onto ``target``."""
    for i in range(kh):
        for j in range(kw):
            target[:, :, i : i + (oh - 1) * sh + 1 : sh, j : j + (ow - 1) * sw + 1 : sw] += values[
                :, :, i, j
            ]


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------


def _check_conv(x: np.ndarray, weight: np.ndarray, bias: Optional[np.ndarray]) -> None:
    _, c, _, _ = check_rank4(x, "x")
    f, wc, _, _ = check_rank4(weight, "weight")
    if c != wc:
        raise ShapeError(f"Channel mismatch: input has {c} channels, kernel expects {wc}")
    if bias is not None and bias.shape != (f,):
        raise ShapeError(f"Bias must have shape ({f},), got {bias.shape}")


def _batch_chunk(n: int, rows_per_image: int, cols: int) -> int:
    return max(1, min(n, _PATCH_BUDGET // max(1, rows_per_image * cols)))


def im2col(
    x: np.ndarray,
    kernel: PairLike,
    stride: PairLike = 1,
    padding: Padding = "same",
) -> np.ndarray:
    """
    Lower an input to its patch matrix.

    Returns:
        Array of shape (n * oh * ow, c * kh * kw); row order is (n, oh, ow),
        column order (c, kh, kw), matching ``weight.reshape(f, -1)``.
    """
    n, c, h, w = check_rank4(x)
    kh, kw = pair(kernel)
    sh, sw = pair(stride)
    oh, ow = output_hw(h, w, kernel, stride, padding)
    xp = _pad(x, pad_amounts(h, w, kernel, stride, padding))
    windows = _windows(xp, kh, kw, sh, sw, oh, ow)
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: PairLike = 1,
    padding: Padding = "same",
) -> Tensor:
    """
    2-D cross-correlation through patch-matrix lowering.

    Args:
        x: Input (n, c, h, w)
        weight: Kernel (f, c, kh, kw)
        bias: Optional length-f bias
        stride: Int or (sh, sw)
        padding: "valid" or "same"

    Returns:
        Output (n, f, oh, ow)
    """
    _check_conv(x, weight, bias)
    n, c, h, w = x.shape
    f, _, kh, kw = weight.shape
    oh, ow = output_hw(h, w, (kh, kw), stride, padding)
    dtype = np.result_type(x.dtype, weight.dtype)
    w2 = weight.reshape(f, -1)
    out = np.empty((n, f, oh, ow), dtype=dtype)
    chunk = _batch_chunk(n, oh * ow, c * kh * kw)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        cols = im2col(x[start:stop], (kh, kw), stride, padding)
        product = cols @ w2.T
        out[start:stop] = product.reshape(stop - start, oh, ow, f).transpose(0, 3, 1, 2)
    if bias is not None:
        out += bias.reshape(1, f, 1, 1)
    return out


def conv2d_backward(
    grad_out: Tensor,
    x: Tensor,
    weight: Tensor,
    stride: PairLike = 1,
    padding: Padding = "same",
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients of ``conv2d`` with respect to input, weight and bias.

    The patch matrix is rebuilt chunk by chunk instead of being kept from the
    forward pass.
    """
    n, c, h, w = x.shape
    f, _, kh, kw = weight.shape
    sh, sw = pair(stride)
    amounts = pad_amounts(h, w, (kh, kw), stride, padding)
    top, bottom, left, right = amounts
    oh, ow = grad_out.shape[2], grad_out.shape[3]
    w2 = weight.reshape(f, -1)

    dw = np.zeros_like(w2)
    dxp = np.zeros((n, c, h + top + bottom, w + left + right), dtype=grad_out.dtype)
    chunk = _batch_chunk(n, oh * ow, c * kh * kw)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        cols = im2col(x[start:stop], (kh, kw), stride, padding)
        g2 = grad_out[start:stop].transpose(0, 2, 3, 1).reshape(-1, f)
        dw += g2.T @ cols
        dcols = (g2 @ w2).reshape(stop - start, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
        _scatter_windows(dxp[start:stop], dcols, kh, kw, sh, sw, oh, ow)

    dx = dxp[:, :, top : top + h, left : left + w]
    db = grad_out.sum(axis=(0, 2, 3))
    return np.ascontiguousarray(dx), dw.reshape(weight.shape), db


def conv2d_oracle(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: PairLike = 1,
    padding: Padding = "same",
) -> Tensor:
    """Reference convolution by direct nested loops."""
    _check_conv(x, weight, bias)
    n, c, h, w = x.shape
    f, _, kh, kw = weight.shape
    sh, sw = pair(stride)
    oh, ow = output_hw(h, w, (kh, kw), stride, padding)
    top, bottom, left, right = pad_amounts(h, w, (kh, kw), stride, padding)

    padded = np.zeros((n, c, h + top + bottom, w + left + right), dtype=np.float64)
    for ni in range(n):
        for ci in range(c):
            for yi in range(h):
                for xi in range(w):
                    padded[ni, ci, yi + top, xi + left] = x[ni, ci, yi, xi]

    out = np.zeros((n, f, oh, ow), dtype=np.result_type(x.dtype, weight.dtype))
    for ni in range(n):
        for fi in range(f):
            for oy in range(oh):
                for ox in range(ow):
                    acc = 0.0
                    for ci in range(c):
                        for i in range(kh):
                            for j in range(kw):
                                acc += padded[ni, ci, oy * sh + i, ox * sw + j] * float(
                                    weight[fi, ci, i, j]
                                )
                    if bias is not None:
                        acc += float(bias[fi])
                    out[ni, fi, oy, ox] = acc
    return out


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------


def max_pool(x: Tensor, window: PairLike = (3, 3), stride: PairLike = (2, 2)) -> Tensor:
    """Overlapped max pooling without padding."""
    n, c, h, w = check_rank4(x)
    kh, kw = pair(window)
    sh, sw = pair(stride)
    oh, ow = output_hw(h, w, window, stride, "valid")
    return _windows(x, kh, kw, sh, sw, oh, ow).max(axis=(4, 5))


def max_pool_backward(
    grad_out: Tensor,
    x: Tensor,
    window: PairLike = (3, 3),
    stride: PairLike = (2, 2),
) -> Tensor:
    """Route each output gradient to the first maximal element of its window."""
    n, c, h, w = x.shape
    kh, kw = pair(window)
    sh, sw = pair(stride)
    oh, ow = grad_out.shape[2], grad_out.shape[3]
    flat = _windows(x, kh, kw, sh, sw, oh, ow).reshape(n, c, oh, ow, kh * kw)
    winner = flat.argmax(axis=-1)
    dx = np.zeros(x.shape, dtype=grad_out.dtype)
    for idx in range(kh * kw):
        i, j = divmod(idx, kw)
        dx[:, :, i : i + (oh - 1) * sh + 1 : sh, j : j + (ow - 1) * sw + 1 : sw] += np.where(
            winner == idx, grad_out, 0
        )
    return dx


def _pool_counts(
    h: int,
    w: int,
    window: PairLike,
    stride: PairLike,
    padding: Padding,
    dtype: np.dtype,
) -> np.ndarray:
    kh, kw = pair(window)
    sh, sw = pair(stride)
    oh, ow = output_hw(h, w, window, stride, padding)
    ones = _pad(np.ones((1, 1, h, w), dtype=dtype), pad_amounts(h, w, window, stride, padding))
    return _windows(ones, kh, kw, sh, sw, oh, ow).sum(axis=(4, 5))


def avg_pool(
    x: Tensor,
    window: PairLike = (3, 3),
    stride: PairLike = (1, 1),
    padding: Padding = "same",
) -> Tensor:
    """Average pooling; padded cells are excluded from the divisor."""
    n, c, h, w = check_rank4(x)
    kh, kw = pair(window)
    sh, sw = pair(stride)
    oh, ow = output_hw(h, w, window, stride, padding)
    xp = _pad(x, pad_amounts(h, w, window, stride, padding))
    sums = _windows(xp, kh, kw, sh, sw, oh, ow).sum(axis=(4, 5))
    return sums / _pool_counts(h, w, window, stride, padding, x.dtype)


def avg_pool_backward(
    grad_out: Tensor,
    x_shape: Sequence[int],
    window: PairLike = (3, 3),
    stride: PairLike = (1, 1),
    padding: Padding = "same",
) -> Tensor:
    n, c, h, w = x_shape
    kh, kw = pair(window)
    sh, sw = pair(stride)
    oh, ow = grad_out.shape[2], grad_out.shape[3]
    top, bottom, left, right = pad_amounts(h, w, window, stride, padding)
    share = grad_out / _pool_counts(h, w, window, stride, padding, grad_out.dtype)
    spread = np.broadcast_to(share[:, :, None, None], (n, c, kh, kw, oh, ow))
    dxp = np.zeros((n, c, h + top + bottom, w + left + right), dtype=grad_out.dtype)
    _scatter_windows(dxp, spread, kh, kw, sh, sw, oh, ow)
    return np.ascontiguousarray(dxp[:, :, top : top + h, left : left + w])


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over the spatial dims, shape (n, c, 1, 1)."""
    check_rank4(x)
    return x.mean(axis=(2, 3), keepdims=True)


def global_avg_pool_backward(grad_out: Tensor, x_shape: Sequence[int]) -> Tensor:
    n, c, h, w = x_shape
    return np.broadcast_to(grad_out / (h * w), (n, c, h, w)).copy()


# ---------------------------------------------------------------------------
# Structural and elementwise
# ---------------------------------------------------------------------------


def concat_channels(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate along the channel axis, keeping list order."""
    if not parts:
        raise ShapeError("concat_channels needs at least one part")
    n, _, h, w = check_rank4(parts[0], "parts[0]")
    for i, part in enumerate(parts[1:], start=1):
        pn, _, ph, pw = check_rank4(part, f"parts[{i}]")
        if (pn, ph, pw) != (n, h, w):
            raise ShapeError(
                f"Cannot concatenate part {i} with (n, h, w)={(pn, ph, pw)} onto {(n, h, w)}"
            )
    return np.concatenate(parts, axis=1)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum of identically shaped tensors."""
    check_same_shape(a, b, "add operands")
    return a + b


def relu(x: Tensor) -> Tensor:
    return np.maximum(x, 0)


def relu_backward(grad_out: Tensor, x: Tensor) -> Tensor:
    # derivative at exactly 0 is 0
    return grad_out * (x > 0)


def elu(x: Tensor, alpha: float = 1.0) -> Tensor:
    return np.where(x >= 0, x, alpha * np.expm1(np.minimum(x, 0)))


def elu_backward(grad_out: Tensor, x: Tensor, alpha: float = 1.0) -> Tensor:
    return grad_out * np.where(x >= 0, 1.0, alpha * np.exp(np.minimum(x, 0))).astype(x.dtype)


ACTIVATIONS: Dict[str, Tuple[Callable[[Tensor], Tensor], Callable[[Tensor, Tensor], Tensor]]] = {
    "relu": (relu, relu_backward),
    "elu": (elu, elu_backward),
}


def softmax(logits: Tensor, axis: int = 1) -> Tensor:
    """Shift-invariant normalized exponential along ``axis``."""
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(grad_out: Tensor, probs: Tensor, axis: int = 1) -> Tensor:
    return probs * (grad_out - (grad_out * probs).sum(axis=axis, keepdims=True))
