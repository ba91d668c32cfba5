"""Spatial stream: a small residual CNN over the onset image, fusion, and the head."""
from typing import Optional, Sequence, Tuple

import numpy as np

from src.config import ConfigurationError
from src.numeric import Conv2d, ContractViolation, Linear, Module, Tensor, ops


class BasicBlock(Module):
    """Two 3x3 convolutions with an identity or 1x1 projection shortcut."""

    def __init__(self, in_channels: int, out_channels: int, stride: int, rng: np.random.Generator):
        self.conv1 = Conv2d(in_channels, out_channels, 3, rng, stride=stride)
        self.conv2 = Conv2d(out_channels, out_channels, 3, rng)
        self.shortcut: Optional[Conv2d] = None
        if stride != 1 or in_channels != out_channels:
            self.shortcut = Conv2d(in_channels, out_channels, 1, rng, stride=stride, pad=0)

    def forward(self, x: Tensor) -> Tensor:
        y = self.conv2(ops.relu(self.conv1(x)))
        skip = self.shortcut(x) if self.shortcut is not None else x
        return ops.relu(ops.add(y, skip))


class SpatialNet(Module):
    """Stride-2 stem and two stride-2 residual stages: output at 1/8 of the image side."""

    def __init__(self, rng: np.random.Generator, channels: Sequence[int] = (16, 32)):
        c1, c2 = channels
        self.stem = Conv2d(3, c1, 3, rng, stride=2)
        self.layer1 = BasicBlock(c1, c1, 2, rng)
        self.layer2 = BasicBlock(c1, c2, 2, rng)
        self.out_channels = c2

    def forward(self, img: Tensor) -> Tensor:
        return self.layer2(self.layer1(ops.relu(self.stem(img))))


def spatial_forward(
    img: Tensor,
    net: SpatialNet,
    expected_hw: Optional[Tuple[int, int]] = None,
) -> Tensor:
    """
    Extract the spatial feature map of an onset image (H x W x 3 or batched).

    Raises:
        ContractViolation: If the image does not have 3 channels
        ConfigurationError: If the output grid differs from ``expected_hw``
    """
    if img.shape[-1] != 3 or img.ndim not in (3, 4):
        raise ContractViolation(f"onset image must be (B,)H x W x 3, got {img.shape}")
    unbatched = img.ndim == 3
    x = ops.reshape(img, (1,) + img.shape) if unbatched else img
    out = net(x)
    if expected_hw is not None and out.shape[1:3] != tuple(expected_hw):
        raise ConfigurationError(
            f"spatial features {out.shape[1:3]} do not align with temporal stage-2 grid {tuple(expected_hw)}"
        )
    return ops.reshape(out, out.shape[1:]) if unbatched else out


class Fusion(Module):
    """1x1 projection of spatial features to the temporal width, bias starting at zero."""

    def __init__(self, spatial_channels: int, temporal_channels: int, rng: np.random.Generator):
        self.proj = Conv2d(spatial_channels, temporal_channels, 1, rng, pad=0)

    def forward(self, temporal: Tensor, spatial: Tensor) -> Tensor:
        return fuse(temporal, spatial, self)


def fuse(temporal: Tensor, spatial: Tensor, fusion: Fusion) -> Tensor:
    """temporal + project(spatial); spatial grids must match."""
    if temporal.shape[:-1] != spatial.shape[:-1]:
        raise ContractViolation(
            f"fusion grids differ: temporal {temporal.shape}, spatial {spatial.shape}"
        )
    return ops.add(temporal, fusion.proj(spatial))


class ClassifierHead(Module):
    def __init__(self, in_features: int, n_classes: int, rng: np.random.Generator):
        self.linear = Linear(in_features, n_classes, rng)

    def forward(self, features: Tensor) -> Tensor:
        return classify(features, self)


def classify(final_features: Tensor, head: ClassifierHead) -> Tensor:
    """Pooled features (B, C) or (C,) -> logits."""
    expected = head.linear.weight.shape[0]
    if final_features.shape[-1] != expected:
        raise ContractViolation(f"head expects {expected} features, got {final_features.shape}")
    if final_features.ndim == 1:
        logits = head.linear(ops.reshape(final_features, (1, expected)))
        return ops.reshape(logits, (logits.shape[-1],))
    return head.linear(final_features)


def cls_loss(logits: Tensor, label) -> Tensor:
    """Mean cross-entropy; accepts one logit vector with an integer label or a batch."""
    if logits.ndim == 1:
        logits = ops.reshape(logits, (1, logits.shape[0]))
    return ops.cross_entropy(logits, np.atleast_1d(np.asarray(label)))
