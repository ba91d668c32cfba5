"""Multi-head self-attention over kept tokens."""
import math
from typing import Optional

import numpy as np

from src.numeric import ContractViolation, Linear, Module, Tensor, ops
from src.utils.metrics import MetricsRegistry


def attention_core(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    """softmax(Q K^T / sqrt(d_head)) V over (..., L, d_head) operands."""
    if q.shape != k.shape or q.shape[:-1] != v.shape[:-1]:
        raise ContractViolation(f"attention operands disagree: q {q.shape}, k {k.shape}, v {v.shape}")
    if q.shape[-2] == 0:
        raise ContractViolation("attention needs at least one kept token")
    axes = tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2)
    scores = ops.mul(ops.matmul(q, ops.transpose(k, axes)), 1.0 / math.sqrt(q.shape[-1]))
    return ops.matmul(ops.softmax(scores, axis=-1), v)


def attention_flops(n_tokens: int, d_model: int) -> int:
    """Multiply-adds of the score and mixing products for one sample."""
    return 4 * n_tokens * n_tokens * d_model


class MultiHeadAttention(Module):
    def __init__(self, d_model: int, heads: int, rng: np.random.Generator):
        if d_model % heads != 0:
            raise ContractViolation(f"d_model {d_model} is not divisible by heads {heads}")
        self.heads = heads
        self.d_model = d_model
        self.qkv = Linear(d_model, 3 * d_model, rng)
        self.out_proj = Linear(d_model, d_model, rng)

    def forward(
        self,
        u: Tensor,
        metrics: Optional[MetricsRegistry] = None,
        flop_key: Optional[str] = None,
    ) -> Tensor:
        bsz, length, d = u.shape
        d_head = d // self.heads
        qkv = ops.reshape(self.qkv(u), (bsz, length, 3, self.heads, d_head))
        qkv = ops.transpose(qkv, (2, 0, 3, 1, 4))
        q, k, v = qkv[0], qkv[1], qkv[2]
        y = attention_core(q, k, v)
        y = ops.reshape(ops.transpose(y, (0, 2, 1, 3)), (bsz, length, d))
        if metrics is not None and flop_key is not None:
            metrics.increment(flop_key, bsz * attention_flops(length, d))
        return self.out_proj(y)
