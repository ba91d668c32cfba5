"""Leave-one-subject-out protocol: splits, per-fold training and pooled metrics."""
import contextvars
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np
from sklearn.model_selection import LeaveOneGroupOut

from src.config import ConfigurationError
from src.data import ArrayDataset
from src.search import Config
from src.utils.logger import get_logger

from .metrics import ConfusionMatrix, uar, uf1

logger = get_logger(__name__)


class FoldFailedError(Exception):
    """Raised when a LOSO fold fails; names the held-out subject."""

    def __init__(self, subject: str, cause: BaseException):
        self.subject = subject
        self.cause = cause
        super().__init__(f"fold for held-out subject '{subject}' failed: {cause}")


@dataclass(frozen=True)
class LOSOSplit:
    subject: str
    train_index: Tuple[int, ...]
    test_index: Tuple[int, ...]
    train_ids: Tuple[str, ...]
    test_ids: Tuple[str, ...]


def loso_splits(dataset: ArrayDataset) -> List[LOSOSplit]:
    """
    One split per subject, ordered by subject id.

    Raises:
        ConfigurationError: If the dataset holds fewer than two subjects
    """
    groups = np.asarray(dataset.subjects)
    n_subjects = len(np.unique(groups))
    if n_subjects < 2:
        raise ConfigurationError(f"LOSO needs at least 2 subjects, dataset has {n_subjects}")
    splits = []
    for train_idx, test_idx in LeaveOneGroupOut().split(np.zeros(len(groups)), groups=groups):
        splits.append(LOSOSplit(
            subject=str(groups[test_idx[0]]),
            train_index=tuple(int(i) for i in train_idx),
            test_index=tuple(int(i) for i in test_idx),
            train_ids=tuple(dataset.ids[i] for i in train_idx),
            test_ids=tuple(dataset.ids[i] for i in test_idx),
        ))
    return splits


@dataclass
class FoldOutcome:
    """What a fold trainer hands back: one prediction per test sample."""
    predictions: np.ndarray
    best_config: Optional[Config] = None
    details: Dict[str, Any] = field(default_factory=dict)


class FoldTrainer(Protocol):
    def train_fold(self, split: LOSOSplit, train: ArrayDataset, test: ArrayDataset, seed: int) -> FoldOutcome:
        ...


@dataclass
class FoldResult:
    subject: str
    confusion: ConfusionMatrix
    best_config: Optional[Config]
    seed: int
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_test(self) -> int:
        return self.confusion.total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "seed": self.seed,
            "n_test": self.n_test,
            "uf1": uf1(self.confusion, strict=False),
            "uar": uar(self.confusion, strict=False),
            "confusion": self.confusion.to_list(),
            "best_config": (
                {"ratios": list(self.best_config.ratios), "alpha": self.best_config.alpha}
                if self.best_config is not None else None
            ),
            **({"details": self.details} if self.details else {}),
        }


@dataclass
class LOSOReport:
    folds: List[FoldResult]
    pooled: ConfusionMatrix

    @property
    def uf1(self) -> float:
        return uf1(self.pooled, strict=False)

    @property
    def uar(self) -> float:
        return uar(self.pooled, strict=False)

    def config_distribution(self) -> Dict[str, Dict[str, int]]:
        """Per ratio slot and for alpha: searched best value -> number of folds."""
        configs = [f.best_config for f in self.folds if f.best_config is not None]
        if not configs:
            return {}
        dist: Dict[str, Dict[str, int]] = {}
        for slot in range(len(configs[0].ratios)):
            counts = Counter(f"{c.ratios[slot]:.1f}" for c in configs)
            dist[f"slot{slot}"] = dict(sorted(counts.items()))
        dist["alpha"] = dict(sorted(Counter(f"{c.alpha:.1f}" for c in configs).items()))
        return dist

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_fold": [f.to_dict() for f in self.folds],
            "pooled": {"uf1": self.uf1, "uar": self.uar, "confusion": self.pooled.to_list()},
            "config_distribution": self.config_distribution(),
        }


def fold_seeds(seed: int, n_folds: int) -> List[int]:
    """Independent per-fold seeds derived from one run seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n_folds)]


def _run_fold(trainer: FoldTrainer, dataset: ArrayDataset, split: LOSOSplit, seed: int) -> FoldResult:
    train = dataset.subset(split.train_index)
    test = dataset.subset(split.test_index)
    try:
        outcome = trainer.train_fold(split, train, test, seed)
    except Exception as e:
        raise FoldFailedError(split.subject, e) from e
    predictions = np.asarray(outcome.predictions, dtype=np.int64)
    if predictions.shape != (len(test),):
        raise FoldFailedError(
            split.subject,
            ValueError(f"expected {len(test)} predictions, got shape {predictions.shape}"),
        )
    cm = ConfusionMatrix.from_predictions(test.labels, predictions, dataset.n_classes)
    logger.info(
        f"Fold {split.subject}: {cm.tp.sum()}/{cm.total} correct"
        + (f", best {outcome.best_config.describe()}" if outcome.best_config is not None else "")
    )
    return FoldResult(split.subject, cm, outcome.best_config, seed, dict(outcome.details))


def run_loso(trainer: FoldTrainer, dataset: ArrayDataset, seed: int = 0, workers: int = 1) -> LOSOReport:
    """
    Train and test one fold per subject and pool the confusion matrices.

    Folds get independent seeds derived from ``seed``, so the report does not
    depend on ``workers``.

    Raises:
        FoldFailedError: For the first failing fold in subject order
    """
    splits = loso_splits(dataset)
    seeds = fold_seeds(seed, len(splits))
    logger.info(f"Running LOSO over {len(splits)} subjects ({len(dataset)} samples)")

    if workers > 1 and len(splits) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(contextvars.copy_context().run, _run_fold, trainer, dataset, split, s)
                for split, s in zip(splits, seeds)
            ]
            folds = [f.result() for f in futures]
    else:
        folds = [_run_fold(trainer, dataset, split, s) for split, s in zip(splits, seeds)]

    pooled = ConfusionMatrix.zeros(dataset.n_classes)
    for fold in folds:
        pooled = pooled + fold.confusion
    report = LOSOReport(folds=folds, pooled=pooled)
    logger.info(f"LOSO pooled UF1 {report.uf1:.4f} UAR {report.uar:.4f}")
    return report
