"""Ablation grid: magnifier on/off, sparse selection on/off, for each backbone kind."""
from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.classifier import AMMSMNet
from src.config import BackboneKind, RunConfig
from src.data import ArrayDataset
from src.numeric import precision
from src.search import Config, SearchSpace
from src.utils.logger import get_logger

from .bench import bench_inputs, time_forward
from .loso import FoldTrainer, LOSOReport, run_loso

logger = get_logger(__name__)


@dataclass(frozen=True)
class AblationVariant:
    name: str
    use_magnifier: bool
    use_sparse: bool
    backbone: BackboneKind = BackboneKind.SSD

    def apply(self, settings: RunConfig) -> RunConfig:
        model = settings.model.model_copy(update={
            "use_magnifier": self.use_magnifier,
            "use_sparse": self.use_sparse,
            "backbone": self.backbone,
        })
        return settings.model_copy(update={"model": model})


def _grid() -> List[AblationVariant]:
    variants = []
    for kind in (BackboneKind.SSD, BackboneKind.ATTENTION):
        for magnifier, sparse in ((False, False), (True, False), (False, True), (True, True)):
            name = "+".join([kind.value] + ["magnifier"] * magnifier + ["sparse"] * sparse)
            variants.append(AblationVariant(name, use_magnifier=magnifier, use_sparse=sparse, backbone=kind))
    return variants


DEFAULT_VARIANTS: List[AblationVariant] = _grid()


def selected_config(report: LOSOReport, space: SearchSpace) -> Config:
    """Most frequent searched config across folds; ties go to the earliest fold."""
    configs = [f.best_config for f in report.folds if f.best_config is not None]
    if not configs:
        return space.uniform(space.ratio_choices[0], space.alpha_choices[0])
    counts = Counter(c.key() for c in configs)
    top = max(counts.values())
    return next(c for c in configs if counts[c.key()] == top)


@dataclass
class AblationReport:
    results: Dict[str, LOSOReport]
    variants: List[AblationVariant]
    selected: Dict[str, Config]
    latency_ms: Dict[str, float]

    def scores(self) -> Dict[str, Dict[str, float]]:
        return {name: {"uf1": r.uf1, "uar": r.uar} for name, r in self.results.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variants": [
                {
                    "name": v.name,
                    "use_magnifier": v.use_magnifier,
                    "use_sparse": v.use_sparse,
                    "backbone": v.backbone.value,
                    "uf1": self.results[v.name].uf1,
                    "uar": self.results[v.name].uar,
                    "confusion": self.results[v.name].pooled.to_list(),
                    "ratios": list(self.selected[v.name].ratios),
                    "alpha": self.selected[v.name].alpha,
                    "latency_ms": self.latency_ms.get(v.name),
                }
                for v in self.variants
            ],
        }


def run_ablation(
    settings: RunConfig,
    dataset: ArrayDataset,
    trainer_factory: Callable[[RunConfig], FoldTrainer],
    variants: Optional[Sequence[AblationVariant]] = None,
    bench_latency: bool = True,
) -> AblationReport:
    """
    Run the full LOSO protocol once per variant on the same data and seed.

    With ``bench_latency`` each variant is also timed at the config its folds
    selected most often, on inputs of the benchmark shape.
    """
    variants = list(variants or DEFAULT_VARIANTS)
    results: Dict[str, LOSOReport] = {}
    selected: Dict[str, Config] = {}
    latency: Dict[str, float] = {}
    resolution = settings.bench.resolution or dataset.resolution

    for variant in variants:
        logger.info(f"Ablation variant {variant.name}")
        variant_settings = variant.apply(settings)
        report = run_loso(
            trainer_factory(variant_settings), dataset, seed=settings.seed, workers=settings.eval.fold_workers
        )
        results[variant.name] = report
        space = SearchSpace.from_settings(variant_settings.search, variant_settings.model)
        config = selected_config(report, space)
        selected[variant.name] = config

        if bench_latency:
            with precision(settings.precision.value):
                onset, flow = bench_inputs(settings.bench.batch_size, resolution, settings.seed)
                model = AMMSMNet(
                    variant_settings.model,
                    dataset.n_classes,
                    np.random.default_rng(settings.seed),
                    alpha_range=(settings.search.alpha_min, settings.search.alpha_max),
                )
                latency[variant.name] = time_forward(
                    model, onset, flow, config.ratios, config.alpha,
                    settings.bench.warmup, settings.bench.repeats,
                )
            logger.info(f"{variant.name}: {config.describe()}, median {latency[variant.name]:.2f} ms/batch")
    return AblationReport(results=results, variants=variants, selected=selected, latency_ms=latency)
