"""Temporal-stream backbone: SSD core, sparse blocks, stages."""
from .ssd import SSDMixer, TokenGrid, ssd_core, ssd_core_oracle, ssd_flops
from .attention import MultiHeadAttention, attention_core, attention_flops
from .blocks import SparseBlock, msa_block, sssd_block
from .stages import Stage, TemporalBackbone, backbone_forward, dense_ssd_flops, stage_resolutions

__all__ = [
    "SSDMixer",
    "TokenGrid",
    "ssd_core",
    "ssd_core_oracle",
    "ssd_flops",
    "MultiHeadAttention",
    "attention_core",
    "attention_flops",
    "SparseBlock",
    "msa_block",
    "sssd_block",
    "Stage",
    "TemporalBackbone",
    "backbone_forward",
    "dense_ssd_flops",
    "stage_resolutions",
]
