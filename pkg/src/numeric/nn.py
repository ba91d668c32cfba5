"""Parameter containers and the small set of layers the models are built from."""
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from . import ops
from .errors import ContractViolation
from .tensor import Parameter, Tensor, get_dtype


class Module:
    """Base class for anything holding Parameters.

    Parameters are discovered by walking instance attributes in assignment
    order: Parameters, sub-Modules, and lists/tuples of Modules.
    """

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray], strict: bool = True) -> None:
        own = dict(self.named_parameters())
        if strict:
            missing = sorted(set(own) - set(state))
            unexpected = sorted(set(state) - set(own))
            if missing or unexpected:
                raise ContractViolation(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for name, value in state.items():
            if name not in own:
                continue
            param = own[name]
            if tuple(value.shape) != param.shape:
                raise ContractViolation(f"{name}: stored shape {tuple(value.shape)} != parameter shape {param.shape}")
            param.data = np.asarray(value, dtype=param.dtype).copy()


def _normal(rng: np.random.Generator, shape: Tuple[int, ...], std: float) -> np.ndarray:
    return (rng.standard_normal(shape) * std).astype(get_dtype())


def _zeros(shape: Tuple[int, ...]) -> np.ndarray:
    return np.zeros(shape, dtype=get_dtype())


class Linear(Module):
    """Affine map over the last axis."""

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        bias: bool = True,
        std: Optional[float] = None,
        zero_init: bool = False,
    ):
        std = np.sqrt(2.0 / (in_features + out_features)) if std is None else std
        shape = (in_features, out_features)
        self.weight = Parameter(_zeros(shape) if zero_init else _normal(rng, shape, std))
        self.bias = Parameter(_zeros((out_features,))) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        y = ops.matmul(x, self.weight)
        return ops.add(y, self.bias) if self.bias is not None else y


class Conv2d(Module):
    """NHWC convolution with He-normal initialization."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        stride: int = 1,
        pad: Optional[int] = None,
        bias: bool = True,
        zero_init: bool = False,
    ):
        shape = (kernel_size, kernel_size, in_channels, out_channels)
        std = np.sqrt(2.0 / (kernel_size * kernel_size * in_channels))
        self.weight = Parameter(_zeros(shape) if zero_init else _normal(rng, shape, std))
        self.bias = Parameter(_zeros((out_channels,))) if bias else None
        self.stride = stride
        self.pad = kernel_size // 2 if pad is None else pad

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, stride=self.stride, pad=self.pad)


class DepthwiseConv2d(Module):
    """Per-channel 'same' convolution."""

    def __init__(self, channels: int, kernel_size: int, rng: np.random.Generator, bias: bool = True):
        shape = (kernel_size, kernel_size, channels)
        self.weight = Parameter(_normal(rng, shape, np.sqrt(1.0 / (kernel_size * kernel_size))))
        self.bias = Parameter(_zeros((channels,))) if bias else None
        self.pad = kernel_size // 2

    def forward(self, x: Tensor) -> Tensor:
        return ops.depthwise_conv2d(x, self.weight, self.bias, stride=1, pad=self.pad)


class LayerNorm(Module):
    def __init__(self, features: int, eps: float = 1e-5):
        self.gamma = Parameter(np.ones((features,), dtype=get_dtype()))
        self.beta = Parameter(_zeros((features,)))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta, eps=self.eps)
