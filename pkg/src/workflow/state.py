"""Workflow state definition."""
from typing import Any, Dict, List, Optional, TypedDict

import numpy as np


class FoldState(TypedDict, total=False):
    """State of one LOSO fold as it moves through the pipeline."""

    # Input parameters
    settings: Any  # RunConfig
    split: Any  # LOSOSplit
    train_data: Any  # ArrayDataset
    test_data: Any  # ArrayDataset
    seed: int

    # Prepared by prepare_fold
    fit_data: Any
    val_data: Any
    val_subjects: List[str]
    model: Any  # AMMSMNet
    trainer: Any  # Trainer
    space: Any  # SearchSpace
    search_seed: int

    # Search results
    best_config: Any  # Config
    best_fitness: float
    search_log: List[Dict[str, Any]]
    generation_best: List[float]

    # Outputs
    predictions: np.ndarray
    summary: Dict[str, Any]

    # Execution metadata
    status: str
    errors: List[str]
    current_step: str
    exception: Optional[BaseException]
