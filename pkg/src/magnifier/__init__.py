"""Motion magnifier: alpha map, U-shaped magnifier network, losses."""
from .unet import MagnifierNet, make_alpha_map, magnify
from .losses import LossSchedule, mag_loss, loss_weight, total_loss

__all__ = [
    "MagnifierNet",
    "make_alpha_map",
    "magnify",
    "LossSchedule",
    "mag_loss",
    "loss_weight",
    "total_loss",
]
