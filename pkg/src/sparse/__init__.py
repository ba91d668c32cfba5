"""Sparse window selection."""
from .windows import (
    WINDOW,
    Mask,
    StageSelection,
    WindowGrid,
    apply_mask,
    copy_back,
    crop,
    gather_windows,
    importance_scores,
    keep_count,
    pad_to_windows,
    partition_windows,
    scatter_windows,
    topk_mask,
)

__all__ = [
    "WINDOW",
    "Mask",
    "StageSelection",
    "WindowGrid",
    "apply_mask",
    "copy_back",
    "crop",
    "gather_windows",
    "importance_scores",
    "keep_count",
    "pad_to_windows",
    "partition_windows",
    "scatter_windows",
    "topk_mask",
]
