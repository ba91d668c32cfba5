"""Adaptive-training and fine-tuning phases."""
from typing import Any, Dict

from src.search import Trainer, validation_loss

from .base_phase import BasePhase, PhaseResult, PhaseStatus


class AdaptiveTrainingPhase(BasePhase):
    """Trains with a freshly sampled configuration per batch."""

    required_keys = ["trainer", "fit_data"]

    def execute(self, context: Dict[str, Any]) -> PhaseResult:
        trainer: Trainer = context["trainer"]
        epochs = trainer.schedule.adaptive_epochs
        if epochs == 0:
            return PhaseResult(status=PhaseStatus.SKIPPED, data={"epochs": 0})
        trainer.adaptive_train(context["fit_data"])
        history = [r for r in trainer.history if r.phase == "adaptive"]
        return PhaseResult(
            status=PhaseStatus.SUCCESS,
            data={"epochs": epochs, "final_loss": history[-1].mean_loss},
            metadata={"losses": [r.mean_loss for r in history]},
        )


class FineTunePhase(BasePhase):
    """Trains under the searched configuration, held fixed."""

    required_keys = ["trainer", "fit_data", "best_config"]

    def execute(self, context: Dict[str, Any]) -> PhaseResult:
        trainer: Trainer = context["trainer"]
        best = context["best_config"]
        epochs = trainer.schedule.finetune_epochs
        if epochs == 0:
            return PhaseResult(status=PhaseStatus.SKIPPED, data={"epochs": 0})
        trainer.finetune(context["fit_data"], best)
        history = [r for r in trainer.history if r.phase == "finetune"]
        data = {"epochs": epochs, "final_loss": history[-1].mean_loss}
        if context.get("val_data") is not None:
            data["val_loss"] = validation_loss(
                trainer.model, context["val_data"], best, trainer.schedule.batch_size
            )
        return PhaseResult(status=PhaseStatus.SUCCESS, data=data)
