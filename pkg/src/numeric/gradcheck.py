"""Central-difference verification of tape gradients."""
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation, NumericError
from .tensor import GradTape, Parameter, Tensor


def _scalar(value: Tensor) -> float:
    result = value.item()
    if not np.isfinite(result):
        raise NumericError(f"function value {result} is not finite")
    return result


def _coordinates(size: int, max_coords: Optional[int], rng: Optional[np.random.Generator]) -> np.ndarray:
    if max_coords is None or max_coords >= size:
        return np.arange(size)
    rng = rng or np.random.default_rng(0)
    return np.sort(rng.choice(size, size=max_coords, replace=False))


def finite_diff_check(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    eps: float = 1e-4,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Compare the tape gradient of a scalar function against central differences.

    Args:
        f: Scalar-valued function of one tensor
        x: Point to check at (its dtype sets the working precision)
        eps: Central-difference step
        max_coords: Check only a random subset of this many coordinates
        rng: Generator used to pick the subset

    Returns:
        max over coordinates of |autodiff - numeric| / (|numeric| + 1e-8)
    """
    if eps <= 0:
        raise ContractViolation(f"eps must be positive, got {eps}")
    point = Tensor(x.data.copy(), requires_grad=True, dtype=x.dtype)
    with GradTape() as tape:
        value = f(point)
    _scalar(value)
    analytic = tape.gradient(value, [point])[0].reshape(-1)

    flat = point.data.reshape(-1)
    worst = 0.0
    for i in _coordinates(flat.size, max_coords, rng):
        original = flat[i]
        flat[i] = original + eps
        plus = _scalar(f(Tensor.wrap(point.data.copy())))
        flat[i] = original - eps
        minus = _scalar(f(Tensor.wrap(point.data.copy())))
        flat[i] = original
        numeric = (plus - minus) / (2 * eps)
        worst = max(worst, abs(analytic[i] - numeric) / (abs(numeric) + 1e-8))
    return float(worst)


def finite_diff_check_parameter(
    loss_fn: Callable[[], Tensor],
    param: Parameter,
    eps: float = 1e-4,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Same check as finite_diff_check, perturbing a model parameter in place.

    ``loss_fn`` closes over the model and recomputes the scalar loss from scratch.
    """
    with GradTape() as tape:
        value = loss_fn()
    _scalar(value)
    analytic = tape.gradient(value, [param])[0].reshape(-1)

    flat = param.data.reshape(-1)
    worst = 0.0
    for i in _coordinates(flat.size, max_coords, rng):
        original = flat[i]
        flat[i] = original + eps
        plus = _scalar(loss_fn())
        flat[i] = original - eps
        minus = _scalar(loss_fn())
        flat[i] = original
        numeric = (plus - minus) / (2 * eps)
        worst = max(worst, abs(analytic[i] - numeric) / (abs(numeric) + 1e-8))
    return float(worst)
