"""Sparse backbone layers: SSSD blocks and their MSA substitutes.

A block only computes on the windows its mask keeps: kept windows are
gathered, normalized, locally filtered per window, mixed as one token
sequence, passed through the FFN, and scattered back. Masked windows leave
the block as zeros.
"""
from typing import Optional

import numpy as np

from src.config import BlockKind, StageConfig
from src.numeric import ContractViolation, DepthwiseConv2d, LayerNorm, Linear, Module, Tensor, ops
from src.sparse import Mask, gather_windows, scatter_windows, topk_mask
from src.sparse.windows import WINDOW
from src.utils.metrics import MetricsRegistry, flop_key

from .attention import MultiHeadAttention
from .ssd import SSDMixer, TokenGrid


class SparseBlock(Module):
    """Pre-norm -> DWConv -> mixer -> residual, then pre-norm -> DWConv -> FFN -> residual."""

    def __init__(
        self,
        d_model: int,
        kind: BlockKind,
        stage_config: StageConfig,
        rng: np.random.Generator,
        stage: int = 0,
        layer: int = 0,
    ):
        self.kind = BlockKind(kind)
        self.stage = stage
        self.layer = layer
        self.norm1 = LayerNorm(d_model)
        self.dwconv1 = DepthwiseConv2d(d_model, 3, rng)
        if self.kind == BlockKind.SSSD:
            self.mixer = SSDMixer(d_model, stage_config.d_state, stage_config.heads, rng)
        else:
            self.mixer = MultiHeadAttention(d_model, stage_config.heads, rng)
        self.norm2 = LayerNorm(d_model)
        self.dwconv2 = DepthwiseConv2d(d_model, 3, rng)
        hidden = stage_config.ffn_expand * d_model
        self.fc1 = Linear(d_model, hidden, rng)
        self.fc2 = Linear(hidden, d_model, rng)

    def _local(self, windows: Tensor, norm: LayerNorm, dwconv: DepthwiseConv2d) -> Tensor:
        b, k, wh, ww, c = windows.shape
        flat = ops.reshape(windows, (b * k, wh, ww, c))
        return ops.reshape(dwconv(norm(flat)), windows.shape)

    def forward_windows(self, windows: Tensor, metrics: Optional[MetricsRegistry] = None) -> Tensor:
        """Run the block on gathered windows (B, k, 4, 4, C)."""
        key = flop_key(self.kind.value, self.stage, self.layer)
        tokens, grid = TokenGrid.flatten(self._local(windows, self.norm1, self.dwconv1))
        mixed = grid.unflatten(self.mixer(tokens, metrics=metrics, flop_key=key))
        y1 = ops.add(windows, mixed)
        hidden = ops.gelu(self.fc1(self._local(y1, self.norm2, self.dwconv2)))
        return ops.add(y1, self.fc2(hidden))

    def forward(self, x: Tensor, mask: Mask, metrics: Optional[MetricsRegistry] = None) -> Tensor:
        if x.ndim != 4:
            raise ContractViolation(f"block expects a B x H x W x C map, got {x.shape}")
        rows, cols = x.shape[1] // WINDOW, x.shape[2] // WINDOW
        indices = mask.kept_indices()
        if indices.shape[0] != x.shape[0]:
            indices = np.broadcast_to(indices, (x.shape[0], indices.shape[1]))
        out = self.forward_windows(gather_windows(x, indices), metrics)
        return scatter_windows(out, indices, rows, cols)


def sssd_block(
    x: Tensor,
    s: float,
    cached_phi: np.ndarray,
    block: SparseBlock,
    metrics: Optional[MetricsRegistry] = None,
) -> Tensor:
    """One SSSD layer with its mask derived from cached window scores."""
    if block.kind != BlockKind.SSSD:
        raise ContractViolation(f"sssd_block called with a {block.kind.value} block")
    return block(x, topk_mask(cached_phi, s), metrics)


def msa_block(
    x: Tensor,
    s: float,
    cached_phi: np.ndarray,
    block: SparseBlock,
    metrics: Optional[MetricsRegistry] = None,
) -> Tensor:
    """Same wiring as sssd_block with attention as the mixer."""
    if block.kind != BlockKind.MSA:
        raise ContractViolation(f"msa_block called with a {block.kind.value} block")
    return block(x, topk_mask(cached_phi, s), metrics)
