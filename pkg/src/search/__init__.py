"""Configuration search: space, adaptive training, genetic search, fine-tuning."""
from .space import Config, FitnessRecord, SearchSpace, sample_config
from .evolution import EvolutionarySearch, FitnessFn, evolve
from .training import EpochRecord, Trainer, TrainingAborted, predict, validation_loss

__all__ = [
    "Config",
    "FitnessRecord",
    "SearchSpace",
    "sample_config",
    "EvolutionarySearch",
    "FitnessFn",
    "evolve",
    "EpochRecord",
    "Trainer",
    "TrainingAborted",
    "predict",
    "validation_loss",
]
