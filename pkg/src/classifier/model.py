"""Two-stream micro-expression classifier."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.backbone import TemporalBackbone
from src.config import ModelConfig, StageConfig
from src.magnifier import MagnifierNet, make_alpha_map, magnify
from src.numeric import ContractViolation, Module, Tensor
from src.utils.metrics import MetricsRegistry

from .spatial import ClassifierHead, Fusion, SpatialNet, spatial_forward


@dataclass
class ModelOutput:
    logits: Tensor
    of_mag: Optional[Tensor]
    stage2: Tensor


class AMMSMNet(Module):
    """
    Magnifier -> sparse temporal backbone, with the spatial stream fused after stage 2.

    Without the magnifier the backbone consumes the original flow and no
    magnified flow is returned. Without sparse selection every window is kept
    and no scores are computed.
    """

    def __init__(
        self,
        model_config: ModelConfig,
        n_classes: int,
        rng: np.random.Generator,
        alpha_range: Sequence[float] = (1.0, 4.0),
    ):
        self.n_classes = n_classes
        self.use_magnifier = model_config.use_magnifier
        self.use_sparse = model_config.use_sparse
        self.alpha_range = (float(alpha_range[0]), float(alpha_range[1]))
        self.stage_config: StageConfig = model_config.stage_config()
        self.magnifier = MagnifierNet(rng, model_config.magnifier_channels) if self.use_magnifier else None
        self.backbone = TemporalBackbone(self.stage_config, rng)
        self.spatial = SpatialNet(rng, model_config.spatial_channels)
        self.fusion = Fusion(self.spatial.out_channels, self.stage_config.channels[1], rng)
        self.head = ClassifierHead(self.backbone.out_features, n_classes, rng)

    @property
    def n_slots(self) -> int:
        return self.stage_config.n_pairs

    def forward(
        self,
        onset: Tensor,
        flow: Tensor,
        ratios: Sequence[float],
        alpha: float = 1.0,
        metrics: Optional[MetricsRegistry] = None,
    ) -> ModelOutput:
        if onset.ndim != 4 or flow.ndim != 4 or onset.shape[:3] != flow.shape[:3]:
            raise ContractViolation(f"onset {onset.shape} and flow {flow.shape} must be aligned batches")
        of_mag = None
        temporal_in = flow
        if self.magnifier is not None:
            amap = make_alpha_map(alpha, flow.shape[1], flow.shape[2], self.alpha_range)
            of_mag = magnify(flow, amap, self.magnifier)
            temporal_in = of_mag

        def fuse_hook(stage2: Tensor) -> Tensor:
            spatial = spatial_forward(onset, self.spatial, expected_hw=stage2.shape[1:3])
            return self.fusion(stage2, spatial)

        stage2, pooled = self.backbone(
            temporal_in, ratios, fuse_hook=fuse_hook, use_sparse=self.use_sparse, metrics=metrics
        )
        return ModelOutput(logits=self.head(pooled), of_mag=of_mag, stage2=stage2)
