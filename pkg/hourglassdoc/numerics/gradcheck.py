"""
Central finite-difference gradient check
"""
import typing as tp
import numpy as np
from hourglassdoc.numerics.tensor import Graph, Tensor, backward


def check_gradients(loss_fn: tp.Callable[[], Tensor], tensors: tp.Sequence[Tensor], h: float = 1e-5,
                    samples: tp.Optional[int] = None, seed: int = 0,
                    atol: float = 1e-7) -> tp.Dict[str, float]:
    """
    Compare analytic gradients against central differences.
    Errors are normalized by the larger gradient magnitude, floored at |loss|·h,
    below which a central difference only resolves rounding noise.
    :param loss_fn: builds the scalar loss from the current tensor values
    :param tensors: leaf tensors to check
    :param h: finite-difference step
    :param samples: check at most this many elements per tensor (all if None)
    :param atol: least floor of the error normalization
    :return: max relative error per tensor name
    """
    # pylint: disable=too-many-arguments, too-many-locals
    for tensor in tensors:
        tensor.zero_grad()
    with Graph():
        loss = loss_fn()
        backward(loss)
    floor = max(atol, abs(loss.item()) * h)
    analytic = [tensor.grad.copy() if tensor.grad is not None else np.zeros(tensor.shape) for tensor in tensors]
    rng = np.random.default_rng(seed)
    errors = {}
    for position, (tensor, grad) in enumerate(zip(tensors, analytic)):
        flat = tensor.data.reshape(-1)
        indices = np.arange(flat.size)
        if samples is not None and flat.size > samples:
            indices = rng.choice(flat.size, size=samples, replace=False)
        numeric = np.empty(len(indices))
        for slot, index in enumerate(indices):
            original = flat[index]
            flat[index] = original + h
            upper = loss_fn().item()
            flat[index] = original - h
            lower = loss_fn().item()
            flat[index] = original
            numeric[slot] = (upper - lower) / (2 * h)
        exact = grad.reshape(-1)[indices]
        scale = max(np.max(np.abs(exact), initial=0.0), np.max(np.abs(numeric), initial=0.0), floor)
        errors[tensor.name or f"tensor{position}"] = float(np.max(np.abs(exact - numeric), initial=0.0) / scale)
    return errors
