"""Dense tensors and the gradient tape that records operations on them."""
import threading
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContractViolation

PRECISIONS: Dict[str, np.dtype] = {
    "float32": np.dtype(np.float32),
    "float64": np.dtype(np.float64),
}

_precision: ContextVar[np.dtype] = ContextVar("precision", default=PRECISIONS["float32"])
_local = threading.local()

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


def get_dtype() -> np.dtype:
    """Return the floating dtype new tensors are created with."""
    return _precision.get()


@contextmanager
def precision(mode: str) -> Iterator[np.dtype]:
    """
    Switch the precision used for newly created tensors.

    Args:
        mode: "float32" for training runs, "float64" for gradient checks and oracles

    Yields:
        The active numpy dtype
    """
    if mode not in PRECISIONS:
        raise ContractViolation(f"Unknown precision '{mode}'. Must be one of {list(PRECISIONS)}")
    token = _precision.set(PRECISIONS[mode])
    try:
        yield PRECISIONS[mode]
    finally:
        _precision.reset(token)


class Tensor:
    """N-dimensional floating array with optional gradient tracking."""

    __slots__ = ("data", "requires_grad", "grad", "name")
    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Optional[np.dtype] = None,
        name: Optional[str] = None,
    ):
        self.data: np.ndarray = np.array(data, dtype=dtype or get_dtype())
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @classmethod
    def wrap(cls, data: np.ndarray, requires_grad: bool = False) -> "Tensor":
        """Wrap an existing array without copying or casting it."""
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = requires_grad
        out.grad = None
        out.name = None
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractViolation(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    # Arithmetic delegates to the op suite.
    def __add__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.div(other, self)

    def __neg__(self) -> "Tensor":
        from . import ops
        return ops.neg(self)

    def __matmul__(self, other: Any) -> "Tensor":
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        from . import ops
        return ops.slice(self, index)

    def reshape(self, *shape: Any) -> "Tensor":
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops
        return ops.transpose(self, axes or None)

    def sum(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        from . import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)


class Parameter(Tensor):
    """A trainable tensor; always requires gradients."""

    __slots__ = ()

    def __init__(self, data: Any, dtype: Optional[np.dtype] = None, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, dtype=dtype, name=name)


@dataclass(frozen=True)
class TapeEntry:
    """One recorded operation: its output, inputs and local backward rule."""
    op: str
    output: Tensor
    inputs: Tuple[Tensor, ...]
    backward: BackwardFn


def _tape_stack() -> List["GradTape"]:
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = []
        _local.tapes = stack
    return stack


def current_tape() -> Optional["GradTape"]:
    """Return the innermost active tape of the calling thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class GradTape:
    """
    Records differentiable operations in evaluation order.

    A tape is confined to the thread that entered it. Operations executed while
    no tape is active are not recorded, which is how inference runs.
    """

    def __init__(self) -> None:
        self.entries: List[TapeEntry] = []

    def __enter__(self) -> "GradTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if not stack or stack[-1] is not self:
            raise ContractViolation("GradTape exited out of order")
        stack.pop()

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, op: str, output: Tensor, inputs: Sequence[Tensor], backward: BackwardFn) -> None:
        self.entries.append(TapeEntry(op, output, tuple(inputs), backward))

    def _propagate(self, loss: Tensor) -> Dict[int, np.ndarray]:
        if loss.size != 1:
            raise ContractViolation(f"backward needs a scalar loss, got shape {loss.shape}")
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for entry in reversed(self.entries):
            g = grads.get(id(entry.output))
            if g is None:
                continue
            input_grads = entry.backward(g)
            for tensor, tensor_grad in zip(entry.inputs, input_grads):
                if tensor_grad is None or not tensor.requires_grad:
                    continue
                if tensor_grad.shape != tensor.shape:
                    raise ContractViolation(
                        f"{entry.op} backward produced gradient {tensor_grad.shape} "
                        f"for input of shape {tensor.shape}"
                    )
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + tensor_grad
                else:
                    grads[key] = tensor_grad
        return grads

    def gradient(self, loss: Tensor, sources: Sequence[Tensor]) -> List[np.ndarray]:
        """
        Compute d(loss)/d(source) for each source.

        Sources that lie on no path to the loss get an all-zero gradient.
        """
        grads = self._propagate(loss)
        return [
            grads[id(src)] if id(src) in grads else np.zeros_like(src.data)
            for src in sources
        ]

    def backward(self, loss: Tensor) -> None:
        """Accumulate gradients into the ``grad`` field of every leaf tensor on the tape."""
        grads = self._propagate(loss)
        produced = {id(entry.output) for entry in self.entries}
        seen: set = set()
        for entry in self.entries:
            for tensor in entry.inputs:
                key = id(tensor)
                if key in produced or key in seen or not tensor.requires_grad:
                    continue
                seen.add(key)
                g = grads.get(key)
                if g is None:
                    continue
                tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g


def as_tensor(value: Any, like: Optional[Tensor] = None) -> Tensor:
    """Return ``value`` as a Tensor, matching the dtype of ``like`` for constants."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(value, dtype=dtype)
