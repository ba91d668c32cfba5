"""Evolutionary configuration search over the adaptively trained weights."""
from typing import Any, Dict

from src.config import GAParams
from src.search import Config, EvolutionarySearch, validation_loss

from .base_phase import BasePhase, PhaseResult, PhaseStatus


class ConfigSearchPhase(BasePhase):
    """
    Scores configurations by validation classification loss of the shared
    weights and keeps the best one. Weights are not updated.
    """

    required_keys = ["model", "space", "val_data"]

    def execute(self, context: Dict[str, Any]) -> PhaseResult:
        model = context["model"]
        val_data = context["val_data"]
        batch_size = context.get("batch_size", 8)
        params: GAParams = context.get("ga") or GAParams()

        def fitness(config: Config) -> float:
            return validation_loss(model, val_data, config, batch_size)

        search = EvolutionarySearch(
            context["space"],
            fitness,
            params,
            seed=context.get("seed", 0),
            workers=context.get("workers", 1),
        )
        best = search.run()
        return PhaseResult(
            status=PhaseStatus.SUCCESS,
            data={
                "best_config": best.config,
                "best_fitness": best.fitness,
                "search_log": search.log_records(),
                "generation_best": list(search.generation_best),
            },
            metadata={"evaluations": len(search.records)},
        )
