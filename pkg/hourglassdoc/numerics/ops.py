"""
Differentiable primitives.
Only ``matmul`` contributes multiply-accumulates; every other op records 0 MACs.
"""
import math
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError, DimensionError
from hourglassdoc.numerics.tensor import Tensor, current_graph

Operand = tp.Union[Tensor, float, int, np.ndarray]

_GELU_C = math.sqrt(2.0 / math.pi)


def as_tensor(value: Operand) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=np.float64))


def constant(value: Operand) -> Tensor:
    return as_tensor(value)


def zeros(shape: tp.Sequence[int]) -> Tensor:
    return Tensor(np.zeros(tuple(shape)))


def _emit(kind: str, inputs: tp.Sequence[Tensor], data: tp.Optional[np.ndarray],
          shape: tp.Sequence[int], backward=None, macs: int = 0) -> Tensor:
    """
    Wrap a result and record it on the active graph, if any
    """
    # pylint: disable=too-many-arguments
    graph = current_graph()
    out = Tensor(data, shape=None if data is not None else shape)
    if graph is not None:
        needs_grad = data is not None and any(tensor.requires_grad for tensor in inputs)
        out.requires_grad = needs_grad
        graph.record(kind, tuple(inputs), out, macs, backward if needs_grad else None)
    return out


def _any_meta(*tensors: Tensor) -> bool:
    return any(tensor.is_meta for tensor in tensors)


def _broadcast(kind: str, a: Tensor, b: Tensor) -> tp.Tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(a.shape, b.shape))
    except ValueError as err:
        raise DimensionError(f"{kind}: shapes {a.shape} and {b.shape} do not broadcast") from err


def _unbroadcast(grad: np.ndarray, shape: tp.Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a: Operand, b: Operand) -> Tensor:
    """
    Matrix product over the last two axes, leading axes broadcast.
    Records batch·m·k·n MACs.
    :param a: tensor [..., m, k]
    :param b: tensor [..., k, n]
    :return: tensor [..., m, n]
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    try:
        batch = tuple(np.broadcast_shapes(a.shape[:-2], b.shape[:-2]))
    except ValueError as err:
        raise DimensionError(f"matmul: batch axes of {a.shape} and {b.shape} do not broadcast") from err
    m, k, n = a.shape[-2], a.shape[-1], b.shape[-1]
    shape = batch + (m, n)
    macs = int(np.prod(batch, dtype=np.int64)) * m * k * n
    if _any_meta(a, b):
        return _emit('matmul', (a, b), None, shape, macs=macs)

    def backward(grad):
        grad_a = _unbroadcast(grad @ np.swapaxes(b.data, -1, -2), a.shape) if a.requires_grad else None
        grad_b = _unbroadcast(np.swapaxes(a.data, -1, -2) @ grad, b.shape) if b.requires_grad else None
        return grad_a, grad_b

    return _emit('matmul', (a, b), a.data @ b.data, shape, backward, macs)


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    shape = _broadcast('add', a, b)
    if _any_meta(a, b):
        return _emit('add', (a, b), None, shape)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)

    return _emit('add', (a, b), a.data + b.data, shape, backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    shape = _broadcast('sub', a, b)
    if _any_meta(a, b):
        return _emit('sub', (a, b), None, shape)

    def backward(grad):
        return _unbroadcast(grad, a.shape), _unbroadcast(-grad, b.shape)

    return _emit('sub', (a, b), a.data - b.data, shape, backward)


def mul(a: Operand, b: Operand) -> Tensor:
    """
    Elementwise (Hadamard) product with broadcasting
    """
    a, b = as_tensor(a), as_tensor(b)
    shape = _broadcast('mul', a, b)
    if _any_meta(a, b):
        return _emit('mul', (a, b), None, shape)

    def backward(grad):
        grad_a = _unbroadcast(grad * b.data, a.shape) if a.requires_grad else None
        grad_b = _unbroadcast(grad * a.data, b.shape) if b.requires_grad else None
        return grad_a, grad_b

    return _emit('mul', (a, b), a.data * b.data, shape, backward)


def _check_axis(x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"axis {axis} out of range for shape {x.shape}")
    return axis % x.ndim


def softmax(x: Operand, axis: int = -1, mask: tp.Optional[np.ndarray] = None) -> Tensor:
    """
    Softmax along ``axis``, stabilized by subtracting the slice maximum.
    :param mask: optional boolean array broadcastable to x; False entries get weight 0.
                 Slices without any True entry come out as all zeros.
    """
    x = as_tensor(x)
    axis = _check_axis(x, axis)
    if x.is_meta:
        return _emit('softmax', (x,), None, x.shape)
    logits = x.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        logits = np.where(mask, logits, -np.inf)
    peak = np.max(logits, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    exps = np.exp(logits - peak)
    totals = np.sum(exps, axis=axis, keepdims=True)
    out = np.divide(exps, totals, out=np.zeros_like(exps), where=totals > 0)

    def backward(grad):
        return (out * (grad - np.sum(grad * out, axis=axis, keepdims=True)),)

    return _emit('softmax', (x,), out, x.shape, backward)


def layer_norm(x: Operand, gamma: Tensor, beta: Tensor, eps: float = 1e-6) -> Tensor:
    """
    Normalize the last axis to zero mean and unit variance, then apply gamma/beta
    """
    x = as_tensor(x)
    if eps <= 0:
        raise ContractError(f"layer_norm eps must be positive, got {eps}")
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise DimensionError(f"layer_norm: input {x.shape} with gamma {gamma.shape} and beta {beta.shape}")
    if _any_meta(x, gamma, beta):
        return _emit('layer_norm', (x, gamma, beta), None, x.shape)
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std
    out = normed * gamma.data + beta.data

    def backward(grad):
        grad_normed = grad * gamma.data
        grad_x = inv_std * (grad_normed - grad_normed.mean(axis=-1, keepdims=True)
                            - normed * (grad_normed * normed).mean(axis=-1, keepdims=True))
        rows = tuple(range(x.ndim - 1))
        return grad_x, (grad * normed).sum(axis=rows), grad.sum(axis=rows)

    return _emit('layer_norm', (x, gamma, beta), out, x.shape, backward)


def gelu(x: Operand) -> Tensor:
    """
    GELU, tanh approximation
    """
    x = as_tensor(x)
    if x.is_meta:
        return _emit('gelu', (x,), None, x.shape)
    inner = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    tanh = np.tanh(inner)
    out = 0.5 * x.data * (1.0 + tanh)

    def backward(grad):
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * x.data ** 2)
        return (grad * (0.5 * (1.0 + tanh) + 0.5 * x.data * (1.0 - tanh ** 2) * d_inner),)

    return _emit('gelu', (x,), out, x.shape, backward)


def sigmoid(x: Operand) -> Tensor:
    x = as_tensor(x)
    if x.is_meta:
        return _emit('sigmoid', (x,), None, x.shape)
    out = 0.5 * (1.0 + np.tanh(0.5 * x.data))

    def backward(grad):
        return (grad * out * (1.0 - out),)

    return _emit('sigmoid', (x,), out, x.shape, backward)


def reshape(x: Tensor, shape: tp.Sequence[int]) -> Tensor:
    shape = tuple(int(dim) for dim in shape)
    if int(np.prod(shape, dtype=np.int64)) != x.size:
        raise DimensionError(f"reshape: cannot view {x.shape} as {shape}")
    if x.is_meta:
        return _emit('reshape', (x,), None, shape)

    def backward(grad):
        return (grad.reshape(x.shape),)

    return _emit('reshape', (x,), x.data.reshape(shape), shape, backward)


def transpose(x: Tensor, axes: tp.Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f"transpose: {axes} is not a permutation for shape {x.shape}")
    shape = tuple(x.shape[axis] for axis in axes)
    if x.is_meta:
        return _emit('transpose', (x,), None, shape)
    inverse = tuple(np.argsort(axes))

    def backward(grad):
        return (np.transpose(grad, inverse),)

    return _emit('transpose', (x,), np.transpose(x.data, axes), shape, backward)


def concat(tensors: tp.Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    reference = tensors[0].shape
    for tensor in tensors[1:]:
        if len(tensor.shape) != len(reference) or any(
                dim != ref for i, (dim, ref) in enumerate(zip(tensor.shape, reference)) if i != axis % len(reference)):
            raise DimensionError(f"concat: {tensor.shape} does not fit {reference} along axis {axis}")
    axis = axis % len(reference)
    sizes = [tensor.shape[axis] for tensor in tensors]
    shape = reference[:axis] + (sum(sizes),) + reference[axis + 1:]
    if _any_meta(*tensors):
        return _emit('concat', tensors, None, shape)
    bounds = np.cumsum(sizes)[:-1]

    def backward(grad):
        return tuple(np.split(grad, bounds, axis=axis))

    return _emit('concat', tensors, np.concatenate([t.data for t in tensors], axis=axis), shape, backward)


def take(x: Tensor, indices: tp.Union[np.ndarray, tp.Sequence[int]], axis: int = 0) -> Tensor:
    """
    Gather slices along an axis (embedding lookups, row selection, repetition); 0 MACs
    """
    indices = np.asarray(indices, dtype=np.int64)
    axis = _check_axis(x, axis)
    if indices.size and (indices.min() < 0 or indices.max() >= x.shape[axis]):
        raise DimensionError(f"take: index out of range for axis {axis} of {x.shape}")
    shape = x.shape[:axis] + indices.shape + x.shape[axis + 1:]
    if x.is_meta:
        return _emit('take', (x,), None, shape)

    def backward(grad):
        full = np.zeros(x.shape)
        moved_full = np.moveaxis(full, axis, 0)
        moved_grad = np.moveaxis(grad.reshape(x.shape[:axis] + (indices.size,) + x.shape[axis + 1:]), axis, 0)
        np.add.at(moved_full, indices.reshape(-1), moved_grad)
        return (full,)

    return _emit('take', (x,), np.take(x.data, indices, axis=axis), shape, backward)


def sum_(x: Tensor, axis: tp.Optional[int] = None, keepdims: bool = False) -> Tensor:
    if axis is None:
        shape = tuple(1 for _ in x.shape) if keepdims else ()
    else:
        axis = _check_axis(x, axis)
        shape = x.shape[:axis] + ((1,) if keepdims else ()) + x.shape[axis + 1:]
    if x.is_meta:
        return _emit('sum', (x,), None, shape)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, x.shape).copy(),)

    return _emit('sum', (x,), np.asarray(np.sum(x.data, axis=axis, keepdims=keepdims)), shape, backward)


def mean(x: Tensor, axis: tp.Optional[int] = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else x.shape[_check_axis(x, axis)]
    return mul(sum_(x, axis=axis, keepdims=keepdims), 1.0 / count)


def cross_entropy(logits: Tensor, targets: tp.Sequence[int],
                  weights: tp.Optional[np.ndarray] = None) -> Tensor:
    """
    Weighted mean of per-row softmax cross-entropy.
    Rows with weight 0 are excluded; if every weight is 0 the loss is 0.
    :param logits: tensor [n, classes]
    :param targets: n class indices
    """
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise DimensionError(f"cross_entropy: logits {logits.shape} with targets {targets.shape}")
    weights = np.ones(len(targets)) if weights is None else np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    scale = weights / total if total > 0 else np.zeros_like(weights)
    if logits.is_meta:
        return _emit('cross_entropy', (logits,), None, ())
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(targets))
    nll = log_norm - shifted[rows, targets]
    loss = np.asarray(float(np.sum(scale * nll)))

    def backward(grad):
        probs = np.exp(shifted - log_norm[:, None])
        probs[rows, targets] -= 1.0
        return (float(grad) * scale[:, None] * probs,)

    return _emit('cross_entropy', (logits,), loss, (), backward)


def binary_cross_entropy(logits: Tensor, targets: tp.Sequence[float],
                         weights: tp.Optional[np.ndarray] = None) -> Tensor:
    """
    Weighted mean of sigmoid cross-entropy, computed from logits
    """
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != logits.shape:
        raise DimensionError(f"binary_cross_entropy: logits {logits.shape} with targets {targets.shape}")
    weights = np.ones(targets.shape) if weights is None else np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    scale = weights / total if total > 0 else np.zeros_like(weights)
    if logits.is_meta:
        return _emit('binary_cross_entropy', (logits,), None, ())
    x = logits.data
    per_item = np.maximum(x, 0.0) - targets * x + np.log1p(np.exp(-np.abs(x)))
    loss = np.asarray(float(np.sum(scale * per_item)))

    def backward(grad):
        probs = 0.5 * (1.0 + np.tanh(0.5 * x))
        return (float(grad) * scale * (probs - targets),)

    return _emit('binary_cross_entropy', (logits,), loss, (), backward)
