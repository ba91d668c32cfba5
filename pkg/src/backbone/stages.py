"""Four-stage hierarchical temporal backbone."""
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import BlockKind, ConfigurationError, StageConfig
from src.numeric import Conv2d, ContractViolation, LayerNorm, Module, Tensor, ops
from src.sparse import StageSelection, copy_back, crop, pad_to_windows
from src.utils.metrics import MetricsRegistry

from .blocks import SparseBlock
from .ssd import ssd_flops

STEM_STRIDE = 4
FusionHook = Callable[[Tensor], Tensor]


class Stage(Module):
    """
    Layers of one resolution level.

    Window scores are computed once from the (padded) stage input. Layer j uses
    ratio slot j // 2. Windows no layer computed are restored from the stage
    input before the padding is cropped away.
    """

    def __init__(self, index: int, d_model: int, stage_config: StageConfig, rng: np.random.Generator):
        self.index = index
        kinds = stage_config.block_kinds()[index]
        self.blocks = [
            SparseBlock(d_model, kind, stage_config, rng, stage=index, layer=j)
            for j, kind in enumerate(kinds)
        ]

    @property
    def n_slots(self) -> int:
        return math.ceil(len(self.blocks) / 2)

    def forward(
        self,
        x: Tensor,
        ratios: Sequence[float],
        use_sparse: bool = True,
        metrics: Optional[MetricsRegistry] = None,
    ) -> Tensor:
        if len(ratios) != self.n_slots:
            raise ContractViolation(f"stage {self.index + 1} needs {self.n_slots} ratios, got {len(ratios)}")
        padded, pad = pad_to_windows(x)
        selection = StageSelection.begin(padded, self.index, enabled=use_sparse, metrics=metrics)
        y = padded
        for j, block in enumerate(self.blocks):
            y = block(y, selection.mask_for(ratios[j // 2]), metrics)
        if use_sparse:
            y = copy_back(y, padded, selection.stage_mask())
        return crop(y, pad)


class TemporalBackbone(Module):
    """Patch-embedding stem, four stages, stride-2 downsampling between them."""

    def __init__(self, stage_config: StageConfig, rng: np.random.Generator, in_channels: int = 2):
        self.stage_config = stage_config
        channels = stage_config.channels
        self.stem = Conv2d(in_channels, channels[0], STEM_STRIDE, rng, stride=STEM_STRIDE, pad=0)
        self.stages = [Stage(i, channels[i], stage_config, rng) for i in range(4)]
        self.downsamples = [
            Conv2d(channels[i], channels[i + 1], 2, rng, stride=2, pad=0) for i in range(3)
        ]
        self.norm = LayerNorm(channels[3])

    @property
    def out_features(self) -> int:
        return self.stage_config.channels[3]

    def split_ratios(self, ratios: Sequence[float]) -> List[List[float]]:
        if len(ratios) != self.stage_config.n_pairs:
            raise ConfigurationError(
                f"expected {self.stage_config.n_pairs} sparsity ratios, got {len(ratios)}"
            )
        out, offset = [], 0
        for stage in self.stages:
            out.append(list(ratios[offset:offset + stage.n_slots]))
            offset += stage.n_slots
        return out

    def forward(
        self,
        of_mag: Tensor,
        ratios: Sequence[float],
        fuse_hook: Optional[FusionHook] = None,
        use_sparse: bool = True,
        metrics: Optional[MetricsRegistry] = None,
    ) -> Tuple[Tensor, Tensor]:
        """
        Returns:
            (stage-2 output before fusion, pooled final features (B, C4))
        """
        if of_mag.ndim != 4 or of_mag.shape[-1] != 2:
            raise ContractViolation(f"backbone expects a B x H x W x 2 flow, got {of_mag.shape}")
        h, w = of_mag.shape[1], of_mag.shape[2]
        if h % 16 or w % 16 or min(h, w) < 32:
            raise ConfigurationError(f"flow {h}x{w} must have sides divisible by 16 and at least 32")
        per_stage = self.split_ratios(ratios)
        x = self.stem(of_mag)
        stage2 = x
        for i, stage in enumerate(self.stages):
            x = stage(x, per_stage[i], use_sparse=use_sparse, metrics=metrics)
            if i == 1:
                stage2 = x
                if fuse_hook is not None:
                    x = fuse_hook(x)
            if i < 3:
                x = self.downsamples[i](x)
        pooled = ops.mean(self.norm(x), axis=(1, 2))
        return stage2, pooled


def backbone_forward(
    of_mag: Tensor,
    backbone: TemporalBackbone,
    ratios: Sequence[float],
    use_sparse: bool = True,
    metrics: Optional[MetricsRegistry] = None,
) -> Tuple[Tensor, Tensor]:
    """Temporal stream without fusion."""
    return backbone(of_mag, ratios, use_sparse=use_sparse, metrics=metrics)


def stage_resolutions(resolution: int) -> List[int]:
    """Side length of every stage's feature map for a square input."""
    side = resolution // STEM_STRIDE
    return [side // (2 ** i) for i in range(4)]


def dense_ssd_flops(stage_config: StageConfig, resolution: int, batch_size: int = 1) -> int:
    """Closed-form SSD-core cost of a forward pass with every window kept."""
    total = 0
    kinds = stage_config.block_kinds()
    for i, side in enumerate(stage_resolutions(resolution)):
        padded = side + (-side) % 4
        tokens = padded * padded
        n_ssd = sum(1 for kind in kinds[i] if kind == BlockKind.SSSD)
        total += n_ssd * ssd_flops(tokens, stage_config.channels[i], stage_config.d_state)
    return batch_size * total
