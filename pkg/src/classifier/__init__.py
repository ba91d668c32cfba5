"""Two-stream classifier: spatial stream, fusion, head, loss."""
from .spatial import (
    BasicBlock,
    ClassifierHead,
    Fusion,
    SpatialNet,
    classify,
    cls_loss,
    fuse,
    spatial_forward,
)
from .model import AMMSMNet, ModelOutput

__all__ = [
    "BasicBlock",
    "ClassifierHead",
    "Fusion",
    "SpatialNet",
    "classify",
    "cls_loss",
    "fuse",
    "spatial_forward",
    "AMMSMNet",
    "ModelOutput",
]
