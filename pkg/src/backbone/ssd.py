"""State-space-duality sequence mixer.

The core evaluates Y = C (B^T (X / A)) per head: a d_state x d_head state is
accumulated over the kept tokens and read out by every query, so cost is
linear in the token count. No causal ordering is imposed.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.numeric import ContractViolation, Linear, Module, NumericError, Tensor, ops
from src.utils.metrics import MetricsRegistry


@dataclass(frozen=True)
class TokenGrid:
    """Window batch (B, k, 4, 4, C) flattened to (B, k*16, C) tokens."""
    window_shape: Tuple[int, ...]

    @classmethod
    def flatten(cls, windows: Tensor) -> Tuple[Tensor, "TokenGrid"]:
        b, k, wh, ww, c = windows.shape
        return ops.reshape(windows, (b, k * wh * ww, c)), cls(windows.shape)

    def unflatten(self, tokens: Tensor) -> Tensor:
        return ops.reshape(tokens, self.window_shape)

    @property
    def n_tokens(self) -> int:
        _, k, wh, ww, _ = self.window_shape
        return k * wh * ww


def _check_core_inputs(x: Tensor, a: Tensor, b: Tensor, c: Tensor) -> None:
    if x.shape[-2] == 0:
        raise ContractViolation("SSD core needs at least one kept token")
    if a.shape[-1] != 1 or a.shape[:-1] != x.shape[:-1]:
        raise ContractViolation(f"gate {a.shape} does not match values {x.shape}")
    if b.shape != c.shape or b.shape[:-1] != x.shape[:-1]:
        raise ContractViolation(f"keys {b.shape} / queries {c.shape} do not match values {x.shape}")
    if np.any(a.data <= 0):
        raise NumericError("SSD gate has non-positive entries")


def ssd_core(x: Tensor, a: Tensor, b: Tensor, c: Tensor) -> Tensor:
    """
    Linear-cost evaluation.

    Args:
        x: values (..., L, d_head)
        a: positive per-token gates (..., L, 1)
        b: keys (..., L, d_state)
        c: queries (..., L, d_state)

    Returns:
        (..., L, d_head)
    """
    _check_core_inputs(x, a, b, c)
    scaled = ops.div(x, a)
    state = ops.matmul(ops.transpose(b, _swap_last(b.ndim)), scaled)
    return ops.matmul(c, state)


def ssd_core_oracle(x: Tensor, a: Tensor, b: Tensor, c: Tensor) -> Tensor:
    """Quadratic-cost evaluation: y_t = sum_s (c_t . b_s) x_s / a_s."""
    _check_core_inputs(x, a, b, c)
    gram = ops.matmul(c, ops.transpose(b, _swap_last(b.ndim)))
    return ops.matmul(gram, ops.div(x, a))


def _swap_last(ndim: int) -> Tuple[int, ...]:
    return tuple(range(ndim - 2)) + (ndim - 1, ndim - 2)


def ssd_flops(n_tokens: int, d_model: int, d_state: int) -> int:
    """Multiply-adds of one core evaluation for one sample: 4 L ds d + L d."""
    return 4 * n_tokens * d_state * d_model + n_tokens * d_model


class SSDMixer(Module):
    """Projections around the SSD core: u -> (X, A, B, C) per head -> Y -> output projection."""

    def __init__(self, d_model: int, d_state: int, heads: int, rng: np.random.Generator):
        if d_model % heads != 0:
            raise ContractViolation(f"d_model {d_model} is not divisible by heads {heads}")
        self.heads = heads
        self.d_state = d_state
        self.d_model = d_model
        self.x_proj = Linear(d_model, d_model, rng)
        self.a_proj = Linear(d_model, 1, rng)
        self.b_proj = Linear(d_model, heads * d_state, rng)
        self.c_proj = Linear(d_model, heads * d_state, rng)
        self.out_proj = Linear(d_model, d_model, rng)

    def _split(self, t: Tensor, width: int) -> Tensor:
        bsz, length, _ = t.shape
        return ops.transpose(ops.reshape(t, (bsz, length, self.heads, width)), (0, 2, 1, 3))

    def project(self, u: Tensor) -> Tuple[Tensor, Tensor, Tensor, Tensor]:
        """(B, L, d) tokens -> per-head x, a, b, c of shape (B, h, L, .)."""
        bsz, length, _ = u.shape
        x = self._split(self.x_proj(u), self.d_model // self.heads)
        a = ops.softplus(self.a_proj(u))
        a = ops.reshape(a, (bsz, 1, length, 1))
        a = ops.concat([a] * self.heads, axis=1) if self.heads > 1 else a
        b = self._split(self.b_proj(u), self.d_state)
        c = self._split(self.c_proj(u), self.d_state)
        return x, a, b, c

    def forward(
        self,
        u: Tensor,
        metrics: Optional[MetricsRegistry] = None,
        flop_key: Optional[str] = None,
    ) -> Tensor:
        bsz, length, d = u.shape
        x, a, b, c = self.project(u)
        y = ssd_core(x, a, b, c)
        y = ops.reshape(ops.transpose(y, (0, 2, 1, 3)), (bsz, length, d))
        if metrics is not None and flop_key is not None:
            metrics.increment(flop_key, bsz * ssd_flops(length, d, self.d_state))
        return self.out_proj(y)
