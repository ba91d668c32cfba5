"""Pipeline phases of one LOSO fold."""
from .base_phase import BasePhase, PhaseError, PhaseResult, PhaseStatus
from .training import AdaptiveTrainingPhase, FineTunePhase
from .search import ConfigSearchPhase
from .prediction import PredictionPhase

__all__ = [
    "BasePhase",
    "PhaseError",
    "PhaseResult",
    "PhaseStatus",
    "AdaptiveTrainingPhase",
    "FineTunePhase",
    "ConfigSearchPhase",
    "PredictionPhase",
]
