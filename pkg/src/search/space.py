"""Quantized search space over per-pair sparsity ratios and the magnification factor."""
import itertools
import math
from typing import Iterator, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import ConfigurationError, ModelConfig, SearchConfig


class Config(BaseModel):
    """One point of the search space."""
    model_config = ConfigDict(frozen=True)

    ratios: Tuple[float, ...]
    alpha: float

    def key(self) -> Tuple[float, ...]:
        return self.ratios + (self.alpha,)

    def describe(self) -> str:
        ratios = ", ".join(f"{r:.1f}" for r in self.ratios)
        return f"ratios=[{ratios}] alpha={self.alpha:.1f}"


class FitnessRecord(BaseModel):
    """A scored configuration; lower fitness is better."""
    model_config = ConfigDict(frozen=True)

    config: Config
    fitness: float
    seed: int
    generation: int = 0

    @field_validator("fitness")
    @classmethod
    def validate_fitness(cls, v: float) -> float:
        if math.isnan(v):
            raise ValueError("fitness must not be NaN")
        return v


class SearchSpace(BaseModel):
    """Cartesian product of ``ratio_choices`` over ``n_slots`` slots and ``alpha_choices``."""
    model_config = ConfigDict(frozen=True)

    ratio_choices: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    alpha_choices: Tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
    n_slots: int = Field(default=5, ge=1)

    @model_validator(mode="after")
    def validate_choices(self) -> "SearchSpace":
        if not self.ratio_choices or not self.alpha_choices:
            raise ValueError("search space needs at least one ratio and one alpha choice")
        if any(not 0.0 <= r < 1.0 for r in self.ratio_choices):
            raise ValueError(f"ratio choices must lie in [0, 1), got {self.ratio_choices}")
        return self

    @classmethod
    def from_settings(cls, search: SearchConfig, model: ModelConfig) -> "SearchSpace":
        """
        Build the space a model actually searches.

        A model without sparse selection searches no ratios (all slots fixed at
        0), one without the magnifier searches no alpha (fixed at the lower bound).
        """
        n_slots = model.stage_config().n_pairs
        ratios = tuple(search.ratio_choices) if model.use_sparse else (0.0,)
        alphas = tuple(search.alpha_choices) if model.use_magnifier else (search.alpha_min,)
        return cls(ratio_choices=ratios, alpha_choices=alphas, n_slots=n_slots)

    @property
    def size(self) -> int:
        return len(self.ratio_choices) ** self.n_slots * len(self.alpha_choices)

    def contains(self, config: Config) -> bool:
        return (
            len(config.ratios) == self.n_slots
            and all(r in self.ratio_choices for r in config.ratios)
            and config.alpha in self.alpha_choices
        )

    def validate_config(self, config: Config) -> Config:
        if not self.contains(config):
            raise ConfigurationError(f"configuration {config.describe()} lies outside the search space")
        return config

    def enumerate(self) -> Iterator[Config]:
        for ratios in itertools.product(self.ratio_choices, repeat=self.n_slots):
            for alpha in self.alpha_choices:
                yield Config(ratios=tuple(ratios), alpha=alpha)

    def uniform(self, value: float, alpha: float) -> Config:
        """Every slot at ``value``; used by benchmarks outside the searched grid."""
        return Config(ratios=(float(value),) * self.n_slots, alpha=float(alpha))


def sample_config(space: SearchSpace, rng: np.random.Generator) -> Config:
    """Independent uniform draw per slot and for alpha."""
    ratio_idx = rng.integers(0, len(space.ratio_choices), size=space.n_slots)
    alpha_idx = int(rng.integers(0, len(space.alpha_choices)))
    return Config(
        ratios=tuple(space.ratio_choices[i] for i in ratio_idx),
        alpha=space.alpha_choices[alpha_idx],
    )
