"""Prediction of the held-out subject."""
from typing import Any, Dict

from src.search import predict

from .base_phase import BasePhase, PhaseResult, PhaseStatus


class PredictionPhase(BasePhase):
    required_keys = ["model", "test_data", "best_config"]

    def execute(self, context: Dict[str, Any]) -> PhaseResult:
        predictions = predict(
            context["model"], context["test_data"], context["best_config"], context.get("batch_size", 8)
        )
        return PhaseResult(status=PhaseStatus.SUCCESS, data={"predictions": predictions})
