"""Window partitioning, L2 importance, top-k masks and copy-back.

Feature maps are channels-last. Every function accepts a single map
(H x W x C) or a batch (B x H x W x C); masks and score grids gain the same
leading batch axis.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from src.config import ConfigurationError
from src.numeric import ContractViolation, NumericError, Tensor, ops
from src.utils.metrics import MetricsRegistry, score_key

WINDOW = 4

ArrayLike = Union[np.ndarray, Tensor]


def _array(x: ArrayLike) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x)


def _check_divisible(shape: Tuple[int, ...]) -> Tuple[int, int]:
    if len(shape) not in (3, 4):
        raise ContractViolation(f"expected H x W x C or B x H x W x C, got shape {shape}")
    h, w = shape[-3], shape[-2]
    if h % WINDOW or w % WINDOW:
        raise ContractViolation(f"feature map {h}x{w} is not divisible into {WINDOW}x{WINDOW} windows")
    return h // WINDOW, w // WINDOW


@dataclass(frozen=True)
class WindowGrid:
    """Logical grid of 4x4 windows over a feature map; windows are numpy views."""
    source: np.ndarray
    rows: int
    cols: int

    @property
    def n_windows(self) -> int:
        return self.rows * self.cols

    def window(self, m: int, n: int) -> np.ndarray:
        if not (0 <= m < self.rows and 0 <= n < self.cols):
            raise ContractViolation(f"window ({m}, {n}) outside grid {self.rows}x{self.cols}")
        return self.source[..., m * WINDOW:(m + 1) * WINDOW, n * WINDOW:(n + 1) * WINDOW, :]


def partition_windows(x: ArrayLike) -> WindowGrid:
    data = _array(x)
    rows, cols = _check_divisible(data.shape)
    return WindowGrid(data, rows, cols)


def _blocked(data: np.ndarray) -> np.ndarray:
    """(..., H, W, C) -> (..., H/4, W/4, 4, 4, C) view-then-copy."""
    *lead, h, w, c = data.shape
    blocks = data.reshape(*lead, h // WINDOW, WINDOW, w // WINDOW, WINDOW, c)
    return np.moveaxis(blocks, -4, -3)


def importance_scores(x: ArrayLike) -> np.ndarray:
    """
    L2 norm of every window.

    Returns:
        (H/4, W/4) or (B, H/4, W/4) array of non-negative scores

    Raises:
        NumericError: If the input holds NaN or Inf
    """
    data = _array(x)
    _check_divisible(data.shape)
    if not np.all(np.isfinite(data)):
        raise NumericError("importance scores requested for a feature map with non-finite values")
    squares = np.square(_blocked(data))
    return np.sqrt(squares.sum(axis=(-3, -2, -1)))


def keep_count(s: float, n_windows: int) -> int:
    """max(1, floor((1 - s) * N)), robust to binary rounding of s."""
    return max(1, math.floor(round((1.0 - s) * n_windows, 9)))


@dataclass(frozen=True)
class Mask:
    """Boolean window grid; True marks a kept window."""
    grid: np.ndarray

    @property
    def n_windows(self) -> int:
        return int(self.grid.shape[-2] * self.grid.shape[-1])

    @property
    def keep_count(self) -> int:
        counts = self.grid.reshape(-1, self.n_windows).sum(axis=1)
        if np.any(counts != counts[0]):
            raise ContractViolation(f"batched mask holds unequal keep counts {counts.tolist()}")
        return int(counts[0])

    def kept_indices(self) -> np.ndarray:
        """Row-major indices of kept windows, ascending; shape (B, k)."""
        flat = self.grid.reshape(-1, self.n_windows)
        k = self.keep_count
        return np.stack([np.flatnonzero(row) for row in flat]).reshape(flat.shape[0], k)

    def upsampled(self) -> np.ndarray:
        """Per-pixel boolean map with a trailing channel axis for broadcasting."""
        full = self.grid.repeat(WINDOW, axis=-2).repeat(WINDOW, axis=-1)
        return full[..., None]

    def union(self, other: "Mask") -> "Mask":
        if self.grid.shape != other.grid.shape:
            raise ContractViolation(f"mask grids {self.grid.shape} and {other.grid.shape} differ")
        return Mask(self.grid | other.grid)

    @classmethod
    def full(cls, shape: Tuple[int, ...], value: bool = True) -> "Mask":
        return cls(np.full(shape, value, dtype=bool))


def topk_mask(phi: np.ndarray, s: float) -> Mask:
    """
    Keep the k = max(1, floor((1 - s) N)) highest-scoring windows.

    Ties are broken by the lowest row-major window index.

    Raises:
        ConfigurationError: If s is not in [0, 1)
    """
    if not 0.0 <= s < 1.0:
        raise ConfigurationError(f"sparsity ratio must lie in [0, 1), got {s}")
    phi = np.asarray(phi)
    if phi.ndim not in (2, 3):
        raise ContractViolation(f"importance map must be 2-D or batched 3-D, got shape {phi.shape}")
    n = phi.shape[-2] * phi.shape[-1]
    k = keep_count(s, n)
    flat = phi.reshape(-1, n)
    order = np.argsort(-flat, axis=1, kind="stable")[:, :k]
    grid = np.zeros_like(flat, dtype=bool)
    np.put_along_axis(grid, order, True, axis=1)
    return Mask(grid.reshape(phi.shape))


def _check_grid(x: Tensor, mask: Mask) -> None:
    rows, cols = _check_divisible(x.shape)
    expected = x.shape[:-3] + (rows, cols)
    if mask.grid.shape != expected:
        raise ContractViolation(f"mask grid {mask.grid.shape} does not match feature map {x.shape}")


def apply_mask(x: Tensor, mask: Mask) -> Tensor:
    """Zero every entry inside a masked window; gradients flow through kept entries only."""
    _check_grid(x, mask)
    keep = np.broadcast_to(mask.upsampled(), x.shape)
    return ops.where(keep, x, Tensor.wrap(np.zeros_like(x.data)))


def copy_back(y_stage: Tensor, x_stage_in: Tensor, mask: Mask) -> Tensor:
    """Take ``y_stage`` on windows kept by ``mask`` and ``x_stage_in`` everywhere else."""
    if y_stage.shape != x_stage_in.shape:
        raise ContractViolation(f"copy_back: shapes {y_stage.shape} and {x_stage_in.shape} differ")
    _check_grid(y_stage, mask)
    keep = np.broadcast_to(mask.upsampled(), y_stage.shape)
    return ops.where(keep, y_stage, x_stage_in)


def gather_windows(x: Tensor, indices: np.ndarray) -> Tensor:
    """(B, H, W, C) -> (B, k, 4, 4, C): the windows at ``indices`` (B, k), in index order."""
    b, h, w, c = x.shape
    rows, cols = _check_divisible(x.shape)
    blocks = ops.reshape(x, (b, rows, WINDOW, cols, WINDOW, c))
    blocks = ops.transpose(blocks, (0, 1, 3, 2, 4, 5))
    blocks = ops.reshape(blocks, (b, rows * cols, WINDOW, WINDOW, c))
    return ops.take_rows(blocks, indices)


def scatter_windows(windows: Tensor, indices: np.ndarray, rows: int, cols: int) -> Tensor:
    """Inverse of gather_windows; windows not listed in ``indices`` are zero."""
    b, _, _, _, c = windows.shape
    full = ops.scatter_rows(windows, indices, rows * cols)
    full = ops.reshape(full, (b, rows, cols, WINDOW, WINDOW, c))
    full = ops.transpose(full, (0, 1, 3, 2, 4, 5))
    return ops.reshape(full, (b, rows * WINDOW, cols * WINDOW, c))


def pad_to_windows(x: Tensor) -> Tuple[Tensor, Tuple[int, int]]:
    """Zero-pad bottom/right so both sides are multiples of 4; returns the pad applied."""
    h, w = x.shape[-3], x.shape[-2]
    pad_h = (-h) % WINDOW
    pad_w = (-w) % WINDOW
    return ops.pad2d(x, pad_h, pad_w), (pad_h, pad_w)


def crop(x: Tensor, pad: Tuple[int, int]) -> Tensor:
    pad_h, pad_w = pad
    if not pad_h and not pad_w:
        return x
    return ops.slice(x, (slice(None), slice(0, x.shape[1] - pad_h), slice(0, x.shape[2] - pad_w)))


@dataclass
class StageSelection:
    """
    Selection state of one stage forward pass.

    Scores are computed once from the stage input; each ratio derives its mask
    from the cached scores. Masks handed out are accumulated so the stage can
    restore exactly the windows no layer computed.
    """
    stage: int
    shape: Tuple[int, ...]
    phi: Optional[np.ndarray] = None
    enabled: bool = True
    _masks: Dict[float, Mask] = field(default_factory=dict)
    _computed: Optional[Mask] = None

    @classmethod
    def begin(
        cls,
        x: Tensor,
        stage: int,
        enabled: bool = True,
        metrics: Optional[MetricsRegistry] = None,
    ) -> "StageSelection":
        rows, cols = _check_divisible(x.shape)
        phi = None
        if enabled:
            phi = importance_scores(x)
            if metrics is not None:
                metrics.increment(score_key(stage))
        return cls(stage=stage, shape=(x.shape[0], rows, cols), phi=phi, enabled=enabled)

    def mask_for(self, s: float) -> Mask:
        if not self.enabled:
            mask = Mask.full(self.shape)
        elif s in self._masks:
            mask = self._masks[s]
        else:
            mask = topk_mask(self.phi, s)
            self._masks[s] = mask
        self._computed = mask if self._computed is None else self._computed.union(mask)
        return mask

    def stage_mask(self) -> Mask:
        """Windows computed by at least one layer; everything else gets copied back."""
        return self._computed if self._computed is not None else Mask.full(self.shape, False)

    @property
    def masks_derived(self) -> List[float]:
        return sorted(self._masks)
