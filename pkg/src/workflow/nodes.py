"""Workflow node implementations."""
from typing import Any, Dict, List, Tuple

import numpy as np

from src.classifier import AMMSMNet
from src.config import RunConfig
from src.data import ArrayDataset
from src.numeric import precision
from src.phases import (
    AdaptiveTrainingPhase,
    ConfigSearchPhase,
    FineTunePhase,
    PhaseResult,
    PhaseStatus,
    PredictionPhase,
)
from src.search import SearchSpace, Trainer
from src.utils.logger import get_logger

from .state import FoldState

logger = get_logger(__name__)


def _failed(step: str, result: PhaseResult) -> Dict[str, Any]:
    return {
        "errors": [result.error],
        "status": "failed",
        "current_step": step,
        "exception": result.metadata.get("exception"),
    }


def _summary(state: FoldState, **updates: Any) -> Dict[str, Any]:
    return {**state.get("summary", {}), **updates}


def split_validation(
    train: ArrayDataset, fraction: float, rng: np.random.Generator
) -> Tuple[ArrayDataset, ArrayDataset, List[str]]:
    """
    Hold out ``fraction`` of the training subjects (at least one) for fitness.

    With a single training subject nothing can be held out and the training set
    doubles as the validation set.
    """
    subjects = sorted(train.subject_ids())
    if len(subjects) < 2:
        logger.warning("Only one training subject; scoring configurations on the training data")
        return train, train, []
    n_val = min(len(subjects) - 1, max(1, int(round(fraction * len(subjects)))))
    val_subjects = sorted(str(s) for s in rng.choice(subjects, size=n_val, replace=False))
    fit_subjects = [s for s in subjects if s not in val_subjects]
    return train.by_subjects(fit_subjects), train.by_subjects(val_subjects), val_subjects


def prepare_fold_node(state: FoldState) -> Dict[str, Any]:
    """Node: Split validation subjects, build the model and its trainer."""
    settings: RunConfig = state["settings"]
    subject = state["split"].subject
    logger.info(f"Node: Preparing fold {subject}")

    try:
        init_seq, train_seq, split_seq, search_seq = np.random.SeedSequence(state["seed"]).spawn(4)
        fit, val, val_subjects = split_validation(
            state["train_data"], settings.search.validation_fraction, np.random.default_rng(split_seq)
        )
        with precision(settings.precision.value):
            model = AMMSMNet(
                settings.model,
                state["train_data"].n_classes,
                np.random.default_rng(init_seq),
                alpha_range=(settings.search.alpha_min, settings.search.alpha_max),
            )
        space = SearchSpace.from_settings(settings.search, settings.model)
        trainer = Trainer(
            model,
            settings.schedule,
            space,
            steps_per_epoch=fit.n_batches(settings.schedule.batch_size),
            rng=np.random.default_rng(train_seq),
        )
    except Exception as e:
        logger.error(f"Preparing fold {subject} failed: {e}", exc_info=True)
        return {"errors": [str(e)], "status": "failed", "current_step": "prepare_fold", "exception": e}

    return {
        "fit_data": fit,
        "val_data": val,
        "val_subjects": val_subjects,
        "model": model,
        "trainer": trainer,
        "space": space,
        "search_seed": int(search_seq.generate_state(1)[0]),
        "status": "running",
        "errors": [],
        "current_step": "prepare_fold",
        "summary": _summary(state, val_subjects=val_subjects, n_fit=len(fit), n_val=len(val)),
    }


def adaptive_train_node(state: FoldState) -> Dict[str, Any]:
    """Node: Adaptive training over sampled configurations."""
    logger.info("Node: Adaptive training")
    settings: RunConfig = state["settings"]
    with precision(settings.precision.value):
        result = AdaptiveTrainingPhase().run(dict(state))
    if result.status == PhaseStatus.FAILED:
        return _failed("adaptive_train", result)
    return {
        "current_step": "adaptive_train",
        "summary": _summary(state, adaptive_loss=result.data.get("final_loss")),
    }


def search_node(state: FoldState) -> Dict[str, Any]:
    """Node: Evolutionary search for the best configuration."""
    logger.info("Node: Searching configurations")
    settings: RunConfig = state["settings"]
    context = {
        **state,
        "ga": settings.search.ga,
        "seed": state["search_seed"],
        "workers": settings.search.fitness_workers,
        "batch_size": settings.schedule.batch_size,
    }
    with precision(settings.precision.value):
        result = ConfigSearchPhase().run(context)
    if result.status == PhaseStatus.FAILED:
        return _failed("search", result)
    return {
        "best_config": result.data["best_config"],
        "best_fitness": result.data["best_fitness"],
        "search_log": result.data["search_log"],
        "generation_best": result.data["generation_best"],
        "current_step": "search",
        "summary": _summary(state, search_val_loss=result.data["best_fitness"]),
    }


def finetune_node(state: FoldState) -> Dict[str, Any]:
    """Node: Fine-tune under the searched configuration."""
    logger.info("Node: Fine-tuning")
    settings: RunConfig = state["settings"]
    with precision(settings.precision.value):
        result = FineTunePhase().run(dict(state))
    if result.status == PhaseStatus.FAILED:
        return _failed("finetune", result)
    return {
        "current_step": "finetune",
        "summary": _summary(
            state,
            finetune_loss=result.data.get("final_loss"),
            finetune_val_loss=result.data.get("val_loss"),
        ),
    }


def predict_node(state: FoldState) -> Dict[str, Any]:
    """Node: Predict the held-out subject."""
    logger.info("Node: Predicting held-out subject")
    settings: RunConfig = state["settings"]
    context = {**state, "batch_size": settings.schedule.batch_size}
    with precision(settings.precision.value):
        result = PredictionPhase().run(context)
    if result.status == PhaseStatus.FAILED:
        return _failed("predict", result)
    return {
        "predictions": result.data["predictions"],
        "status": "completed",
        "current_step": "predict",
    }


def should_continue(state: FoldState) -> str:
    """Route to END as soon as a node reports failure."""
    if state.get("status") == "failed":
        logger.warning(f"Fold stopped at {state.get('current_step')}: {state.get('errors')}")
        return "end"
    return "continue"
