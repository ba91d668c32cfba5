"""LangGraph workflow graph definition."""
import math
from pathlib import Path
from typing import Any, Dict, Optional

from langgraph.graph import END, StateGraph

from src.config import RunConfig
from src.data import ArrayDataset
from src.evaluation.loso import FoldOutcome, LOSOSplit
from src.numeric import save_checkpoint
from src.phases import PhaseError
from src.search import Config
from src.utils.helpers import ensure_directory, write_json, write_jsonl
from src.utils.logger import get_logger
from src.workflow.nodes import (
    adaptive_train_node,
    finetune_node,
    predict_node,
    prepare_fold_node,
    search_node,
    should_continue,
)
from src.workflow.state import FoldState

logger = get_logger(__name__)

_STEPS = ["prepare_fold", "adaptive_train", "search", "finetune", "predict"]


def create_fold_graph():
    """
    Create the per-fold pipeline graph.

    Workflow:
    1. START → prepare_fold
    2. prepare_fold → adaptive_train
    3. adaptive_train → search
    4. search → finetune
    5. finetune → predict
    6. predict → END

    Every step routes to END instead when it reports failure.

    Returns:
        Compiled StateGraph
    """
    workflow = StateGraph(FoldState)

    workflow.add_node("prepare_fold", prepare_fold_node)
    workflow.add_node("adaptive_train", adaptive_train_node)
    workflow.add_node("search", search_node)
    workflow.add_node("finetune", finetune_node)
    workflow.add_node("predict", predict_node)

    workflow.set_entry_point("prepare_fold")

    for step, following in zip(_STEPS, _STEPS[1:]):
        workflow.add_conditional_edges(
            step,
            should_continue,
            {
                "continue": following,
                "end": END,
            }
        )
    workflow.add_edge("predict", END)

    logger.debug("Fold graph created")
    return workflow.compile()


compiled_fold_graph = create_fold_graph()


def config_to_dict(config: Config) -> Dict[str, Any]:
    return {"ratios": list(config.ratios), "alpha": config.alpha}


class FoldPipeline:
    """
    Fold trainer running the compiled graph: adaptive training, search,
    fine-tuning, prediction.

    With an ``output_dir`` each fold leaves a checkpoint of the fine-tuned
    model, its best configuration and the search log behind.
    """

    def __init__(self, settings: RunConfig, output_dir: Optional[Path] = None):
        self.settings = settings
        self.output_dir = Path(output_dir) if output_dir is not None else None

    def train_fold(self, split: LOSOSplit, train: ArrayDataset, test: ArrayDataset, seed: int) -> FoldOutcome:
        initial: FoldState = {
            "settings": self.settings,
            "split": split,
            "train_data": train,
            "test_data": test,
            "seed": seed,
            "status": "pending",
            "errors": [],
            "summary": {},
        }
        final = compiled_fold_graph.invoke(initial)
        if final.get("status") != "completed":
            cause = final.get("exception")
            message = "; ".join(e for e in final.get("errors", []) if e) or "fold pipeline did not complete"
            raise PhaseError(f"step {final.get('current_step')}: {message}") from cause

        if self.output_dir is not None:
            self._write_artifacts(split, final, seed)
        return FoldOutcome(
            predictions=final["predictions"],
            best_config=final["best_config"],
            details=final.get("summary", {}),
        )

    def _write_artifacts(self, split: LOSOSplit, final: FoldState, seed: int) -> None:
        subject = split.subject
        best = config_to_dict(final["best_config"])
        checkpoints = self.output_dir / "checkpoints"
        ensure_directory(checkpoints)
        save_checkpoint(
            checkpoints / f"fold-{subject}.ammt",
            final["model"].state_dict(),
            metadata={
                "subject": subject,
                "seed": seed,
                "best_config": best,
                "n_classes": final["train_data"].n_classes,
                "model": self.settings.model.model_dump(mode="json"),
                "search": {
                    "alpha_min": self.settings.search.alpha_min,
                    "alpha_max": self.settings.search.alpha_max,
                },
            },
        )
        fold_dir = self.output_dir / "folds" / subject
        fitness = final["best_fitness"]
        write_json(fold_dir / "best_config.json", {**best, "fitness": fitness if math.isfinite(fitness) else None})
        write_jsonl(fold_dir / "search_log.jsonl", final["search_log"])
