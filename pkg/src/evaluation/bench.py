"""FLOP and latency benchmark over sparsity variants."""
import statistics
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from threadpoolctl import threadpool_limits

from src.classifier import AMMSMNet
from src.config import BenchConfig
from src.numeric import Tensor
from src.search import SearchSpace
from src.utils.logger import get_logger
from src.utils.metrics import MetricsRegistry

logger = get_logger(__name__)


@dataclass
class LatencyReport:
    sparsity: float
    ratios: List[float]
    block_flops: Dict[str, float]
    latency_ms: float
    batch_size: int
    resolution: int
    backbone: str
    stage_ratio: Dict[str, float] = field(default_factory=dict)

    @property
    def mixer_flops(self) -> float:
        return float(sum(self.block_flops.values()))

    def kind_flops(self, kind: str) -> float:
        prefix = f"flops/{kind}/"
        return float(sum(v for k, v in self.block_flops.items() if k.startswith(prefix)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sparsity": self.sparsity,
            "ratios": self.ratios,
            "backbone": self.backbone,
            "batch_size": self.batch_size,
            "resolution": self.resolution,
            "latency_ms": self.latency_ms,
            "ssd_flops": self.kind_flops("sssd"),
            "msa_flops": self.kind_flops("msa"),
            "mixer_flops": self.mixer_flops,
            "block_flops": self.block_flops,
            "stage_ratio": self.stage_ratio,
        }

    def to_row(self) -> Dict[str, Any]:
        return {
            "sparsity": self.sparsity,
            "backbone": self.backbone,
            "ssd_flops": self.kind_flops("sssd"),
            "msa_flops": self.kind_flops("msa"),
            "mixer_flops": self.mixer_flops,
            "latency_ms": self.latency_ms,
        }


def count_flops(
    model: AMMSMNet,
    ratios: Sequence[float],
    resolution: int,
    batch_size: int = 1,
    alpha: float = 1.0,
    seed: int = 0,
) -> Dict[str, float]:
    """Per-sample mixer FLOPs of one forward pass, keyed by ``flops/<kind>/stage<s>/layer<l>``."""
    onset, flow = bench_inputs(batch_size, resolution, seed)
    registry = MetricsRegistry()
    model.forward(onset, flow, ratios, alpha, registry)
    return {k: v / batch_size for k, v in registry.snapshot("flops/").items()}


def bench_inputs(batch_size: int, resolution: int, seed: int) -> Tuple[Tensor, Tensor]:
    """Random onset images and flows of the benchmark shape."""
    rng = np.random.default_rng(seed)
    onset = Tensor(rng.uniform(0.0, 1.0, (batch_size, resolution, resolution, 3)))
    flow = Tensor(rng.normal(0.0, 0.5, (batch_size, resolution, resolution, 2)))
    return onset, flow


def time_forward(
    model: AMMSMNet,
    onset: Tensor,
    flow: Tensor,
    ratios: Sequence[float],
    alpha: float,
    warmup: int,
    repeats: int,
) -> float:
    """Median wall-clock milliseconds of one forward batch, on one BLAS thread."""
    with threadpool_limits(limits=1):
        for _ in range(warmup):
            model.forward(onset, flow, ratios, alpha)
        timings = []
        for _ in range(repeats):
            start = time.perf_counter()
            model.forward(onset, flow, ratios, alpha)
            timings.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(timings)


def bench(
    model: AMMSMNet,
    settings: BenchConfig,
    resolution: int,
    space: Optional[SearchSpace] = None,
    alpha: float = 1.0,
    seed: int = 0,
) -> List[LatencyReport]:
    """
    Time ``settings.repeats`` forward batches per sparsity variant after
    ``settings.warmup`` untimed ones, on one BLAS thread; report the median.

    Each variant sets every ratio slot to the same value.
    """
    resolution = settings.resolution or resolution
    space = space or SearchSpace(n_slots=model.n_slots)
    onset, flow = bench_inputs(settings.batch_size, resolution, seed)
    reports = []
    for sparsity in settings.variants:
        ratios = list(space.uniform(sparsity, alpha).ratios)
        report = LatencyReport(
            sparsity=float(sparsity),
            ratios=ratios,
            block_flops=count_flops(model, ratios, resolution, settings.batch_size, alpha, seed),
            latency_ms=time_forward(model, onset, flow, ratios, alpha, settings.warmup, settings.repeats),
            batch_size=settings.batch_size,
            resolution=resolution,
            backbone=model.stage_config.backbone.value,
        )
        logger.info(
            f"Bench s={sparsity:.2f}: {report.mixer_flops:.3e} mixer FLOPs/sample, "
            f"median {report.latency_ms:.2f} ms/batch"
        )
        reports.append(report)

    dense = next((r for r in reports if r.sparsity == 0.0), None)
    if dense is not None and dense.kind_flops("sssd") > 0:
        for r in reports:
            r.stage_ratio = {
                f"stage{s}": _stage_share(r, dense, s) for s in range(4)
            }
    return reports


def _stage_share(report: LatencyReport, dense: LatencyReport, stage: int) -> float:
    marker = f"/stage{stage}/"
    ours = sum(v for k, v in report.block_flops.items() if marker in k)
    base = sum(v for k, v in dense.block_flops.items() if marker in k)
    return float(ours / base) if base else 1.0
