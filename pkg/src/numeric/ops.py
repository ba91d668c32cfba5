"""Differentiable operations over Tensors.

Every op computes its forward value with numpy, checks it is finite, and
records a local backward rule on the active GradTape when any input requires
gradients. Image tensors are laid out channels-last: (batch, height, width, channels).
"""
import builtins
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ContractViolation, NumericError
from .tensor import BackwardFn, Tensor, as_tensor, current_tape

Axis = Union[None, int, Tuple[int, ...]]

_GELU_C = np.sqrt(2.0 / np.pi)


def _result(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward: BackwardFn) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NumericError(f"{op} produced non-finite values")
    requires_grad = builtins.any(t.requires_grad for t in inputs)
    out = Tensor.wrap(data, requires_grad=requires_grad)
    if requires_grad:
        tape = current_tape()
        if tape is not None:
            tape.record(op, out, inputs, backward)
    return out


def _pair(a: Any, b: Any) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    """
    Output shape of an elementwise op.

    Only one operand may broadcast. It may lack leading axes, and it may
    stretch size-1 axes only as a trailing run of its own shape, so
    (C,) against (N, C) and (B, L, 1) against (B, L, d) are accepted while
    (1, C) against (N, C) and (N, 1) against (1, C) are not.
    """
    try:
        out = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ContractViolation(f"{op}: shapes {a.shape} and {b.shape} are not broadcastable")
    stretched = [t.shape for t in (a, b) if t.shape != out]
    if len(stretched) == 2:
        raise ContractViolation(f"{op}: shapes {a.shape} and {b.shape} would both broadcast")
    for shape in stretched:
        target = out[len(out) - len(shape):]
        expanded = [i for i, (n, m) in enumerate(zip(shape, target)) if n != m]
        if expanded and expanded != list(range(len(shape) - len(expanded), len(shape))):
            raise ContractViolation(
                f"{op}: shape {shape} broadcasts against {out} on non-trailing axes {expanded}"
            )
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _normalize_axes(axis: Axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


def _expand_reduced(grad: np.ndarray, shape: Tuple[int, ...], axes: Tuple[int, ...], keepdims: bool) -> np.ndarray:
    if not keepdims:
        for a in axes:
            grad = np.expand_dims(grad, a)
    return np.broadcast_to(grad, shape)


# Elementwise arithmetic

def add(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("add", a, b)
    return _result(
        "add", a.data + b.data, (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
    )


def sub(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("sub", a, b)
    return _result(
        "sub", a.data - b.data, (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
    )


def mul(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("mul", a, b)
    return _result(
        "mul", a.data * b.data, (a, b),
        lambda g: (unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)),
    )


def div(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("div", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        data = a.data / b.data
    if not np.all(np.isfinite(data)):
        raise NumericError(f"div: division of {a.shape} by {b.shape} produced non-finite values")

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return _result("div", data, (a, b), backward)


def neg(x: Tensor) -> Tensor:
    return _result("neg", -x.data, (x,), lambda g: (-g,))


def matmul(a: Any, b: Any) -> Tensor:
    """Matrix product over the last two axes with numpy batch broadcasting."""
    a, b = _pair(a, b)
    if a.ndim < 2 or b.ndim < 2:
        raise ContractViolation(f"matmul needs operands of rank >= 2, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ContractViolation(f"matmul: inner dimensions differ for {a.shape} and {b.shape}")
    try:
        data = a.data @ b.data
    except ValueError:
        raise ContractViolation(f"matmul: batch dimensions of {a.shape} and {b.shape} do not broadcast")

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)

    return _result("matmul", data, (a, b), backward)


# Shape manipulation

def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(axes)
    if sorted(a % x.ndim for a in axes) != list(range(x.ndim)):
        raise ContractViolation(f"transpose: {axes} is not a permutation for shape {x.shape}")
    inverse = tuple(np.argsort(axes))
    return _result("transpose", np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        data = x.data.reshape(tuple(shape))
    except ValueError:
        raise ContractViolation(f"reshape: cannot view {x.shape} as {tuple(shape)}")
    return _result("reshape", data, (x,), lambda g: (g.reshape(x.shape),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ContractViolation("concat needs at least one tensor")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = ", ".join(str(t.shape) for t in tensors)
        raise ContractViolation(f"concat along axis {axis}: incompatible shapes {shapes}")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.split(g, bounds, axis=axis))

    return _result("concat", data, tensors, backward)


def slice(x: Tensor, index: Any) -> Tensor:
    """Basic or advanced indexing; gradients scatter back with accumulation."""
    data = x.data[index]
    if not isinstance(data, np.ndarray):
        data = np.asarray(data, dtype=x.dtype)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return _result("slice", np.array(data), (x,), backward)


def pad2d(x: Tensor, bottom: int, right: int) -> Tensor:
    """Zero-pad an NHWC tensor on the bottom and right edges."""
    if bottom == 0 and right == 0:
        return x
    data = np.pad(x.data, ((0, 0), (0, bottom), (0, right), (0, 0)))
    h, w = x.shape[1], x.shape[2]
    return _result("pad2d", data, (x,), lambda g: (g[:, :h, :w, :],))


def upsample2x(x: Tensor) -> Tensor:
    """Nearest-neighbour 2x upsampling of an NHWC tensor."""
    data = x.data.repeat(2, axis=1).repeat(2, axis=2)
    b, h, w, c = x.shape

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (g.reshape(b, h, 2, w, 2, c).sum(axis=(2, 4)),)

    return _result("upsample2x", data, (x,), backward)


def take_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Per-sample row gather: ``out[b, j] = x[b, index[b, j]]``."""
    index = np.asarray(index, dtype=np.int64)
    if index.ndim != 2 or index.shape[0] != x.shape[0]:
        raise ContractViolation(f"take_rows: index {index.shape} does not match batch of {x.shape}")
    batch = np.arange(x.shape[0])[:, None]

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        full = np.zeros_like(x.data)
        np.add.at(full, (batch, index), g)
        return (full,)

    return _result("take_rows", x.data[batch, index], (x,), backward)


def scatter_rows(src: Tensor, index: np.ndarray, n_rows: int) -> Tensor:
    """Inverse of take_rows: rows of ``src`` placed at ``index`` in a zero tensor of ``n_rows`` rows."""
    index = np.asarray(index, dtype=np.int64)
    if index.shape != src.shape[:2]:
        raise ContractViolation(f"scatter_rows: index {index.shape} does not match source {src.shape}")
    batch = np.arange(src.shape[0])[:, None]
    data = np.zeros((src.shape[0], n_rows) + src.shape[2:], dtype=src.dtype)
    data[batch, index] = src.data
    return _result("scatter_rows", data, (src,), lambda g: (g[batch, index],))


def where(condition: np.ndarray, a: Any, b: Any) -> Tensor:
    """Elementwise select; ``condition`` is a constant boolean array."""
    a, b = _pair(a, b)
    if a.shape != b.shape:
        raise ContractViolation(f"where: shapes {a.shape} and {b.shape} differ")
    condition = np.broadcast_to(np.asarray(condition, dtype=bool), a.shape)
    zero = np.zeros((), dtype=a.dtype)
    return _result(
        "where", np.where(condition, a.data, b.data), (a, b),
        lambda g: (np.where(condition, g, zero), np.where(condition, zero, g)),
    )


# Reductions

def sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    data = np.asarray(x.data.sum(axis=axes, keepdims=keepdims))
    return _result("sum", data, (x,), lambda g: (_expand_reduced(g, x.shape, axes, keepdims).copy(),))


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    data = np.asarray(x.data.mean(axis=axes, keepdims=keepdims))
    return _result(
        "mean", data, (x,),
        lambda g: (_expand_reduced(g / count, x.shape, axes, keepdims).copy(),),
    )


def l1_norm(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    data = np.asarray(np.abs(x.data).sum(axis=axes, keepdims=keepdims))
    return _result(
        "l1_norm", data, (x,),
        lambda g: (_expand_reduced(g, x.shape, axes, keepdims) * np.sign(x.data),),
    )


def l2_norm(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    norm = np.sqrt(np.square(x.data).sum(axis=axes, keepdims=True))

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        full = _expand_reduced(g, x.shape, axes, keepdims)
        safe = np.where(norm > 0, norm, 1.0)
        return (np.where(norm > 0, full * x.data / safe, 0.0).astype(x.dtype),)

    data = norm if keepdims else np.squeeze(norm, axis=axes)
    return _result("l2_norm", np.asarray(data), (x,), backward)


# Pointwise nonlinearities

def relu(x: Tensor) -> Tensor:
    positive = x.data > 0
    return _result("relu", np.where(positive, x.data, 0).astype(x.dtype), (x,), lambda g: (g * positive,))


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation."""
    inner = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    t = np.tanh(inner)
    data = 0.5 * x.data * (1.0 + t)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * x.data ** 2)
        local = 0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner
        return ((g * local).astype(x.dtype),)

    return _result("gelu", data.astype(x.dtype), (x,), backward)


def softplus(x: Tensor) -> Tensor:
    data = np.logaddexp(0, x.data).astype(x.dtype)
    sig = (1.0 / (1.0 + np.exp(-x.data))).astype(x.dtype)
    return _result("softplus", data, (x,), lambda g: (g * sig,))


def exp(x: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        data = np.exp(x.data)
    return _result("exp", data, (x,), lambda g: (g * data,))


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise NumericError(f"log of non-positive values in tensor of shape {x.shape}")
    return _result("log", np.log(x.data), (x,), lambda g: (g / x.data,))


def abs(x: Tensor) -> Tensor:
    return _result("abs", np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _result("softmax", y, (x,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise ContractViolation(
            f"layer_norm: gain {gamma.shape} / shift {beta.shape} do not match features of {x.shape}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    data = xhat * gamma.data + beta.data
    n = x.shape[-1]

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        reduce_axes = tuple(range(x.ndim - 1))
        g_gamma = (g * xhat).sum(axis=reduce_axes)
        g_beta = g.sum(axis=reduce_axes)
        gx_hat = g * gamma.data
        gx = inv_std / n * (
            n * gx_hat
            - gx_hat.sum(axis=-1, keepdims=True)
            - xhat * (gx_hat * xhat).sum(axis=-1, keepdims=True)
        )
        return gx.astype(x.dtype), g_gamma.astype(gamma.dtype), g_beta.astype(beta.dtype)

    return _result("layer_norm", data.astype(x.dtype), (x, gamma, beta), backward)


def cross_entropy(logits: Tensor, labels: Any) -> Tensor:
    """Mean negative log-likelihood of integer ``labels`` under softmax(``logits``)."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise ContractViolation(f"cross_entropy: logits {logits.shape} do not match labels {labels.shape}")
    n_classes = logits.shape[1]
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ContractViolation(f"cross_entropy: labels {labels.tolist()} outside [0, {n_classes})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.arange(labels.shape[0])
    data = np.asarray(-log_probs[rows, labels].mean(), dtype=logits.dtype)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.exp(log_probs)
        grad[rows, labels] -= 1.0
        return ((grad * g / labels.shape[0]).astype(logits.dtype),)

    return _result("cross_entropy", data, (logits,), backward)


# Convolutions (NHWC, weights laid out as kernel_h x kernel_w x in x out)

def _conv_geometry(op: str, x: Tensor, kh: int, kw: int, stride: int, pad: int) -> Tuple[np.ndarray, int, int]:
    if x.ndim != 4:
        raise ContractViolation(f"{op} expects an NHWC tensor, got shape {x.shape}")
    xp = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad), (0, 0))) if pad else x.data
    ho = (xp.shape[1] - kh) // stride + 1
    wo = (xp.shape[2] - kw) // stride + 1
    if ho <= 0 or wo <= 0:
        raise ContractViolation(f"{op}: kernel {kh}x{kw} does not fit input {x.shape} with pad {pad}")
    return xp, ho, wo


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, pad: int = 0) -> Tensor:
    """2-D convolution with explicit zero padding; pad = kernel // 2 keeps the size at stride 1."""
    kh, kw, cin, cout = weight.shape
    if x.shape[-1] != cin:
        raise ContractViolation(f"conv2d: input {x.shape} has {x.shape[-1]} channels, weight {weight.shape} expects {cin}")
    xp, ho, wo = _conv_geometry("conv2d", x, kh, kw, stride, pad)
    he, we = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    out = np.zeros((x.shape[0], ho, wo, cout), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            out += xp[:, i:i + he:stride, j:j + we:stride, :] @ weight.data[i, j]
    if bias is not None:
        out += bias.data

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(weight.data)
        flat_g = g.reshape(-1, cout)
        for i in range(kh):
            for j in range(kw):
                patch = xp[:, i:i + he:stride, j:j + we:stride, :]
                gw[i, j] = patch.reshape(-1, cin).T @ flat_g
                gxp[:, i:i + he:stride, j:j + we:stride, :] += g @ weight.data[i, j].T
        gx = gxp[:, pad:pad + x.shape[1], pad:pad + x.shape[2], :] if pad else gxp
        grads: Tuple[Optional[np.ndarray], ...] = (gx, gw)
        if bias is not None:
            grads += (flat_g.sum(axis=0),)
        return grads

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return _result("conv2d", out, inputs, backward)


def depthwise_conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, pad: int = 0) -> Tensor:
    """Per-channel spatial convolution; weight is kernel_h x kernel_w x channels."""
    kh, kw, channels = weight.shape
    if x.shape[-1] != channels:
        raise ContractViolation(f"depthwise_conv2d: input {x.shape} does not match weight {weight.shape}")
    xp, ho, wo = _conv_geometry("depthwise_conv2d", x, kh, kw, stride, pad)
    he, we = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    out = np.zeros((x.shape[0], ho, wo, channels), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            out += xp[:, i:i + he:stride, j:j + we:stride, :] * weight.data[i, j]
    if bias is not None:
        out += bias.data

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(weight.data)
        for i in range(kh):
            for j in range(kw):
                patch = xp[:, i:i + he:stride, j:j + we:stride, :]
                gw[i, j] = (patch * g).sum(axis=(0, 1, 2))
                gxp[:, i:i + he:stride, j:j + we:stride, :] += g * weight.data[i, j]
        gx = gxp[:, pad:pad + x.shape[1], pad:pad + x.shape[2], :] if pad else gxp
        grads: Tuple[Optional[np.ndarray], ...] = (gx, gw)
        if bias is not None:
            grads += (g.sum(axis=(0, 1, 2)),)
        return grads

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return _result("depthwise_conv2d", out, inputs, backward)
