"""Configuration schema using Pydantic models."""
import math
from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Precision(str, Enum):
    """Floating precision of a run."""
    FLOAT32 = "float32"
    FLOAT64 = "float64"


class BackboneKind(str, Enum):
    """Sequence mixer used by the temporal stream."""
    SSD = "ssd"
    ATTENTION = "attention"


class StagePreset(str, Enum):
    """Named stage layouts."""
    DESK = "desk"
    FULL = "full"


class BlockKind(str, Enum):
    """Kind of one backbone layer."""
    SSSD = "sssd"
    MSA = "msa"


class SyntheticSpec(BaseModel):
    """Parameters of the synthetic micro-motion generator."""
    n_subjects: int = Field(default=5, ge=1)
    n_classes: Literal[3, 5] = 3
    samples_per_subject_per_class: int = Field(default=4, ge=1)
    resolution: int = Field(default=64, gt=0)
    motion_amplitude: float = Field(default=0.4, ge=0.0, description="Class-template peak displacement, px")
    distractor_amplitude: float = Field(default=0.6, ge=0.0, description="Rigid global drift, px")
    noise_std: float = Field(default=0.05, ge=0.0, description="White flow noise, px")
    seed: int = 0

    @field_validator("resolution")
    @classmethod
    def validate_resolution(cls, v: int) -> int:
        """Flows pass a stride-4 stem and three stride-2 steps."""
        if v % 16 != 0:
            raise ValueError(f"resolution must be divisible by 16, got {v}")
        return v


class DataConfig(SyntheticSpec):
    """Dataset location plus the generator parameters used by `synth`."""
    dataset_dir: str = Field(default="data/synthetic", description="Dataset directory")


class StageConfig(BaseModel):
    """Layout of the four-stage temporal backbone."""
    layers: List[int] = Field(default=[1, 2, 4, 2])
    channels: List[int] = Field(default=[16, 32, 64, 128])
    d_state: int = Field(default=16, gt=0)
    heads: int = Field(default=2, gt=0)
    ffn_expand: int = Field(default=4, gt=0)
    backbone: BackboneKind = BackboneKind.SSD

    @model_validator(mode="after")
    def validate_layout(self) -> "StageConfig":
        if len(self.layers) != 4 or len(self.channels) != 4:
            raise ValueError("layers and channels must list exactly four stages")
        if any(n < 1 for n in self.layers):
            raise ValueError(f"every stage needs at least one layer, got {self.layers}")
        if any(c % self.heads != 0 for c in self.channels):
            raise ValueError(f"channels {self.channels} must be divisible by heads={self.heads}")
        return self

    @classmethod
    def preset(cls, name: StagePreset) -> "StageConfig":
        if StagePreset(name) == StagePreset.FULL:
            return cls(layers=[2, 4, 8, 4], channels=[64, 128, 256, 512], d_state=64, heads=4)
        return cls()

    @property
    def n_pairs(self) -> int:
        """Number of sparsity-ratio slots: one per consecutive pair of layers in each stage."""
        return sum(math.ceil(n / 2) for n in self.layers)

    def block_kinds(self) -> List[List[BlockKind]]:
        """Kinds per stage and layer; the final layer of stages 3 and 4 is MSA."""
        kinds = []
        for stage, n in enumerate(self.layers):
            if self.backbone == BackboneKind.ATTENTION:
                kinds.append([BlockKind.MSA] * n)
                continue
            stage_kinds = [BlockKind.SSSD] * n
            if stage >= 2:
                stage_kinds[-1] = BlockKind.MSA
            kinds.append(stage_kinds)
        return kinds

    def pair_slot(self, stage: int, layer: int) -> int:
        """Index of the ratio slot governing ``layer`` of ``stage``."""
        offset = sum(math.ceil(n / 2) for n in self.layers[:stage])
        return offset + layer // 2


class ModelConfig(BaseModel):
    """Model dimensions and ablation switches."""
    preset: StagePreset = StagePreset.DESK
    stages: Optional[StageConfig] = Field(default=None, description="Explicit dims; overrides the preset")
    backbone: BackboneKind = BackboneKind.SSD
    magnifier_channels: List[int] = Field(default=[16, 32])
    spatial_channels: List[int] = Field(default=[16, 32])
    use_magnifier: bool = True
    use_sparse: bool = True

    @field_validator("magnifier_channels", "spatial_channels")
    @classmethod
    def validate_widths(cls, v: List[int]) -> List[int]:
        if len(v) != 2 or any(c <= 0 for c in v):
            raise ValueError(f"expected two positive widths, got {v}")
        return v

    def stage_config(self) -> StageConfig:
        base = self.stages if self.stages is not None else StageConfig.preset(self.preset)
        return base.model_copy(update={"backbone": self.backbone})


class GAParams(BaseModel):
    """Evolutionary search hyperparameters."""
    population: int = Field(default=16, ge=2)
    generations: int = Field(default=10, ge=0)
    elite: int = Field(default=2, ge=0)
    tournament: int = Field(default=3, ge=1)
    mutation_rate: float = Field(default=0.2, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def validate_sizes(self) -> "GAParams":
        if self.elite >= self.population:
            raise ValueError(f"elite ({self.elite}) must be smaller than population ({self.population})")
        if self.tournament > self.population:
            raise ValueError(f"tournament ({self.tournament}) exceeds population ({self.population})")
        return self


class SearchConfig(BaseModel):
    """Search-space overrides and search settings."""
    ratio_choices: List[float] = Field(default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
    alpha_choices: List[float] = Field(default=[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])
    alpha_min: float = 1.0
    alpha_max: float = 4.0
    ga: GAParams = Field(default_factory=GAParams)
    validation_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    fitness_workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_choices(self) -> "SearchConfig":
        if not self.ratio_choices or any(not 0.0 <= r < 1.0 for r in self.ratio_choices):
            raise ValueError(f"ratio choices must lie in [0, 1), got {self.ratio_choices}")
        if self.alpha_min > self.alpha_max:
            raise ValueError(f"alpha_min {self.alpha_min} > alpha_max {self.alpha_max}")
        if not self.alpha_choices or any(not self.alpha_min <= a <= self.alpha_max for a in self.alpha_choices):
            raise ValueError(
                f"alpha choices {self.alpha_choices} must lie in [{self.alpha_min}, {self.alpha_max}]"
            )
        return self


class TrainSchedule(BaseModel):
    """Epoch budget and optimizer settings of both training phases."""
    adaptive_epochs: int = Field(default=20, ge=0)
    finetune_epochs: int = Field(default=10, ge=0)
    batch_size: int = Field(default=8, gt=0)
    learning_rate: float = Field(default=2e-3, gt=0.0)
    min_learning_rate: float = Field(default=0.0, ge=0.0)
    weight_decay: float = Field(default=0.05, ge=0.0)

    @property
    def total_epochs(self) -> int:
        """e_r of the scheduled total loss: every planned epoch of both phases."""
        return self.adaptive_epochs + self.finetune_epochs

    @classmethod
    def full_scale(cls) -> "TrainSchedule":
        return cls(adaptive_epochs=70, finetune_epochs=30, batch_size=16, learning_rate=3e-5)


class EvalConfig(BaseModel):
    """LOSO evaluation settings."""
    fold_workers: int = Field(default=1, ge=1)
    write_csv: bool = True
    write_chart: bool = True


class BenchConfig(BaseModel):
    """Latency benchmark settings; each variant sets every ratio slot to that value."""
    variants: List[float] = Field(default=[0.0, 0.25, 0.5, 0.75])
    warmup: int = Field(default=5, ge=0)
    repeats: int = Field(default=20, ge=1)
    batch_size: int = Field(default=4, gt=0)
    resolution: Optional[int] = Field(default=None, description="Defaults to the dataset resolution")

    @field_validator("variants")
    @classmethod
    def validate_variants(cls, v: List[float]) -> List[float]:
        if not v or any(not 0.0 <= s < 1.0 for s in v):
            raise ValueError(f"sparsity variants must lie in [0, 1), got {v}")
        return v

    @field_validator("resolution")
    @classmethod
    def validate_resolution(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and (v <= 0 or v % 16 != 0):
            raise ValueError(f"bench resolution must be a positive multiple of 16, got {v}")
        return v


class LoggingConfig(BaseModel):
    """Logging configuration."""
    level: str = Field(default="INFO")
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None
    max_bytes: int = Field(default=10_000_000, gt=0, description="Rotate the log file at this size")
    backup_count: int = Field(default=3, ge=0)

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        """Validate logging level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level. Must be one of {valid_levels}")
        return v.upper()


class RunConfig(BaseModel):
    """Main run configuration."""
    model_config = ConfigDict(use_enum_values=False, protected_namespaces=())

    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    schedule: TrainSchedule = Field(default_factory=TrainSchedule)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    seed: int = 0
    precision: Precision = Precision.FLOAT32
    output_dir: str = "outputs"
