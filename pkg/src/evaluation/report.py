"""Report files: deterministic JSON, confusion CSV, SVG bar charts and flow figures."""
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ammsm"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.numeric import ContractViolation  # noqa: E402
from src.utils.helpers import ensure_directory, write_json  # noqa: E402
from src.utils.logger import get_logger  # noqa: E402

from .bench import LatencyReport  # noqa: E402
from .metrics import ConfusionMatrix  # noqa: E402

logger = get_logger(__name__)


def write_report(path: Path, payload: dict) -> Path:
    path = write_json(path, payload)
    logger.info(f"Report written to {path}")
    return path


def write_confusion_csv(path: Path, cm: ConfusionMatrix, class_names: Optional[Sequence[str]] = None) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    cm.to_frame(class_names).to_csv(path)
    return path


def write_bench_csv(path: Path, reports: List[LatencyReport]) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    pd.DataFrame([r.to_row() for r in reports]).to_csv(path, index=False)
    return path


def write_bar_chart(path: Path, values: Dict[str, Dict[str, float]], title: str, ylabel: str) -> Path:
    """
    Grouped bars: one group per outer key, one bar per inner key.

    The SVG carries no creation date, so identical values give identical files.
    """
    path = Path(path)
    ensure_directory(path.parent)
    frame = pd.DataFrame(values).T
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(frame) + 2.0), 3.5))
    try:
        frame.plot.bar(ax=ax, rot=0)
        ax.set_title(title)
        ax.set_ylabel(ylabel)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path


def write_metrics_chart(path: Path, metrics: Dict[str, Dict[str, float]]) -> Path:
    """``metrics`` maps a label (fold, variant) to {"uf1": .., "uar": ..}."""
    return write_bar_chart(path, metrics, title="UF1 / UAR", ylabel="score")


def write_latency_chart(path: Path, reports: List[LatencyReport]) -> Path:
    values = {f"s={r.sparsity:.2f}": {"latency_ms": r.latency_ms} for r in reports}
    return write_bar_chart(path, values, title="Median forward latency", ylabel="ms / batch")


def write_flow_figure(path: Path, of_ori: np.ndarray, of_mag: np.ndarray, alpha: float, step: int = 4) -> Path:
    """
    Side-by-side quiver plots of one sample's original and magnified flow (H x W x 2).

    Arrows are drawn every ``step`` pixels over the flow magnitude; both panels
    share one colour scale so the magnification is visible.
    """
    of_ori, of_mag = np.asarray(of_ori), np.asarray(of_mag)
    if of_ori.shape != of_mag.shape or of_ori.ndim != 3 or of_ori.shape[-1] != 2:
        raise ContractViolation(f"flow figure needs two H x W x 2 flows, got {of_ori.shape} and {of_mag.shape}")
    path = Path(path)
    ensure_directory(path.parent)
    h, w, _ = of_ori.shape
    ys, xs = np.mgrid[0:h:step, 0:w:step]
    magnitudes = [np.linalg.norm(f, axis=-1) for f in (of_ori, of_mag)]
    vmax = max(float(m.max()) for m in magnitudes) or 1.0

    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    try:
        for ax, flow, magnitude, title in zip(
            axes, (of_ori, of_mag), magnitudes, ("original flow", f"magnified flow (alpha={alpha:.1f})")
        ):
            ax.imshow(magnitude, cmap="viridis", vmin=0.0, vmax=vmax)
            ax.quiver(xs, ys, flow[::step, ::step, 0], -flow[::step, ::step, 1], color="white", angles="xy")
            ax.set_title(title)
            ax.set_axis_off()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path
