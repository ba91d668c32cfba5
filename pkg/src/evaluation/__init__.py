"""Evaluation harness: metrics, LOSO protocol, benchmark, ablation and reports."""
from .metrics import ConfusionMatrix, per_class_recall, uar, uf1
from .loso import (
    FoldFailedError,
    FoldOutcome,
    FoldResult,
    FoldTrainer,
    LOSOReport,
    LOSOSplit,
    fold_seeds,
    loso_splits,
    run_loso,
)
from .bench import LatencyReport, bench, bench_inputs, count_flops, time_forward
from .ablation import DEFAULT_VARIANTS, AblationReport, AblationVariant, run_ablation
from .report import (
    write_bar_chart,
    write_flow_figure,
    write_bench_csv,
    write_confusion_csv,
    write_latency_chart,
    write_metrics_chart,
    write_report,
)

__all__ = [
    "ConfusionMatrix",
    "per_class_recall",
    "uar",
    "uf1",
    "FoldFailedError",
    "FoldOutcome",
    "FoldResult",
    "FoldTrainer",
    "LOSOReport",
    "LOSOSplit",
    "fold_seeds",
    "loso_splits",
    "run_loso",
    "LatencyReport",
    "bench",
    "bench_inputs",
    "count_flops",
    "time_forward",
    "DEFAULT_VARIANTS",
    "AblationReport",
    "AblationVariant",
    "run_ablation",
    "write_bar_chart",
    "write_flow_figure",
    "write_bench_csv",
    "write_confusion_csv",
    "write_latency_chart",
    "write_metrics_chart",
    "write_report",
]
