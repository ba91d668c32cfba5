"""Workflow package."""
from .state import FoldState
from .graph import FoldPipeline, compiled_fold_graph, config_to_dict, create_fold_graph
from .nodes import (
    adaptive_train_node,
    finetune_node,
    predict_node,
    prepare_fold_node,
    search_node,
    should_continue,
    split_validation,
)

__all__ = [
    "FoldState",
    "FoldPipeline",
    "compiled_fold_graph",
    "config_to_dict",
    "create_fold_graph",
    "adaptive_train_node",
    "finetune_node",
    "predict_node",
    "prepare_fold_node",
    "search_node",
    "should_continue",
    "split_validation",
]
