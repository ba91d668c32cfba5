"""AdamW with decoupled weight decay and a cosine step-size schedule."""
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .tensor import Parameter


class CosineSchedule:
    """Cosine decay from ``base_lr`` to ``min_lr`` over ``total_steps`` optimizer steps."""

    def __init__(self, base_lr: float, total_steps: int, min_lr: float = 0.0):
        self.base_lr = base_lr
        self.total_steps = max(1, total_steps)
        self.min_lr = min_lr

    def __call__(self, step: int) -> float:
        progress = min(max(step, 0), self.total_steps) / self.total_steps
        return self.min_lr + 0.5 * (self.base_lr - self.min_lr) * (1.0 + math.cos(math.pi * progress))


class AdamW:
    """AdamW over a fixed list of parameters. Rank-1 parameters (biases, gains) are not decayed."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.05,
    ):
        self.params: List[Parameter] = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self._m: Dict[int, np.ndarray] = {}
        self._v: Dict[int, np.ndarray] = {}

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        self.step_count += 1
        bias1 = 1.0 - self.beta1 ** self.step_count
        bias2 = 1.0 - self.beta2 ** self.step_count
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue
            g = p.grad
            m = self._m.get(i)
            v = self._v.get(i)
            m = (1 - self.beta1) * g if m is None else self.beta1 * m + (1 - self.beta1) * g
            v = (1 - self.beta2) * g * g if v is None else self.beta2 * v + (1 - self.beta2) * g * g
            self._m[i], self._v[i] = m, v
            update = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            if self.weight_decay and p.ndim > 1:
                p.data = p.data - lr * self.weight_decay * p.data
            p.data = (p.data - lr * update).astype(p.dtype)
