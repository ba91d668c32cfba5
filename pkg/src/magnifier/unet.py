"""Depth-2 encoder-decoder that magnifies an optical flow field."""
from typing import Sequence, Tuple

import numpy as np

from src.config import ConfigurationError
from src.numeric import Conv2d, ContractViolation, Module, Tensor, get_dtype, ops


def make_alpha_map(
    alpha: float,
    h: int,
    w: int,
    alpha_range: Tuple[float, float] = (1.0, 4.0),
) -> Tensor:
    """
    Build the constant H x W x 1 magnification-factor map.

    Raises:
        ConfigurationError: If alpha lies outside ``alpha_range``
        ContractViolation: If h or w is not positive
    """
    lo, hi = alpha_range
    if not lo <= alpha <= hi:
        raise ConfigurationError(f"magnification factor {alpha} outside [{lo}, {hi}]")
    if h <= 0 or w <= 0:
        raise ContractViolation(f"alpha map needs positive dims, got {h}x{w}")
    return Tensor(np.full((h, w, 1), alpha, dtype=get_dtype()))


class MagnifierNet(Module):
    """
    U-shaped network: flow (2) + alpha map (1) in, magnified flow (2) out.

    Two stride-2 encoder steps, a mirrored decoder with skip concatenation,
    3x3 kernels, GELU activations and a 1x1 output layer that starts at zero.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        channels: Sequence[int] = (16, 32),
        zero_init_head: bool = True,
    ):
        c1, c2 = channels
        self.enc1 = Conv2d(3, c1, 3, rng)
        self.down1 = Conv2d(c1, c2, 3, rng, stride=2)
        self.down2 = Conv2d(c2, c2, 3, rng, stride=2)
        self.up2 = Conv2d(2 * c2, c2, 3, rng)
        self.up1 = Conv2d(c2 + c1, c1, 3, rng)
        self.head = Conv2d(c1, 2, 1, rng, zero_init=zero_init_head)

    def forward(self, x: Tensor) -> Tensor:
        e1 = ops.gelu(self.enc1(x))
        e2 = ops.gelu(self.down1(e1))
        bottleneck = ops.gelu(self.down2(e2))
        d2 = ops.gelu(self.up2(ops.concat([ops.upsample2x(bottleneck), e2], axis=-1)))
        d1 = ops.gelu(self.up1(ops.concat([ops.upsample2x(d2), e1], axis=-1)))
        return self.head(d1)


def magnify(of_ori: Tensor, amap: Tensor, net: MagnifierNet) -> Tensor:
    """
    Run the magnifier on a flow field and its alpha map.

    Accepts an unbatched H x W x 2 flow or a batch B x H x W x 2; the alpha map
    (H x W x 1 or B x H x W x 1) is broadcast over the batch.

    Raises:
        ContractViolation: If flow and alpha map disagree spatially, or the
            sides are not multiples of 4
    """
    unbatched = of_ori.ndim == 3
    flow = ops.reshape(of_ori, (1,) + of_ori.shape) if unbatched else of_ori
    if flow.ndim != 4 or flow.shape[-1] != 2:
        raise ContractViolation(f"flow must be (B,)H x W x 2, got {of_ori.shape}")
    b, h, w, _ = flow.shape
    if amap.shape[-3:-1] != (h, w) or amap.shape[-1] != 1:
        raise ContractViolation(f"alpha map {amap.shape} does not match flow {of_ori.shape}")
    if h % 4 or w % 4:
        raise ContractViolation(f"magnifier needs sides divisible by 4, got {h}x{w}")
    if amap.ndim == 3:
        amap = Tensor.wrap(np.broadcast_to(amap.data, (b, h, w, 1)).astype(flow.dtype))
    elif amap.shape[0] != b:
        raise ContractViolation(f"alpha map batch {amap.shape[0]} does not match flow batch {b}")
    out = net(ops.concat([flow, amap], axis=-1))
    return ops.reshape(out, of_ori.shape) if unbatched else out
