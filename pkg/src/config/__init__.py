"""Configuration package."""
from .settings import load_settings, apply_overrides, require_dataset, ConfigurationError
from .schema import (
    RunConfig,
    DataConfig,
    SyntheticSpec,
    StageConfig,
    ModelConfig,
    SearchConfig,
    GAParams,
    TrainSchedule,
    EvalConfig,
    BenchConfig,
    LoggingConfig,
    BackboneKind,
    BlockKind,
    StagePreset,
    Precision,
)

__all__ = [
    "load_settings",
    "apply_overrides",
    "require_dataset",
    "ConfigurationError",
    "RunConfig",
    "DataConfig",
    "SyntheticSpec",
    "StageConfig",
    "ModelConfig",
    "SearchConfig",
    "GAParams",
    "TrainSchedule",
    "EvalConfig",
    "BenchConfig",
    "LoggingConfig",
    "BackboneKind",
    "BlockKind",
    "StagePreset",
    "Precision",
]
