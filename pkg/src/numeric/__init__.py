"""Numeric core: tensors, reverse-mode differentiation, layers and serialization."""
from .errors import NumericCoreError, ContractViolation, NumericError, FormatError
from .tensor import Tensor, Parameter, GradTape, as_tensor, current_tape, get_dtype, precision
from .nn import Module, Linear, Conv2d, DepthwiseConv2d, LayerNorm
from .optim import AdamW, CosineSchedule
from .gradcheck import finite_diff_check, finite_diff_check_parameter
from .serialization import (
    encode_tensor,
    decode_tensor,
    save_tensor,
    load_tensor,
    save_checkpoint,
    load_checkpoint,
)
from . import ops

__all__ = [
    "NumericCoreError",
    "ContractViolation",
    "NumericError",
    "FormatError",
    "Tensor",
    "Parameter",
    "GradTape",
    "as_tensor",
    "current_tape",
    "get_dtype",
    "precision",
    "Module",
    "Linear",
    "Conv2d",
    "DepthwiseConv2d",
    "LayerNorm",
    "AdamW",
    "CosineSchedule",
    "finite_diff_check",
    "finite_diff_check_parameter",
    "encode_tensor",
    "decode_tensor",
    "save_tensor",
    "load_tensor",
    "save_checkpoint",
    "load_checkpoint",
    "ops",
]
