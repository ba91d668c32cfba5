"""Confusion matrix, unweighted F1 (UF1) and unweighted average recall (UAR)."""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from src.numeric import ContractViolation
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[true][pred]`` over ``n_classes`` classes."""
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ContractViolation(f"confusion matrix must be square, got {counts.shape}")
        if (counts < 0).any():
            raise ContractViolation("confusion counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @classmethod
    def from_predictions(cls, y_true: Sequence[int], y_pred: Sequence[int], n_classes: int) -> "ConfusionMatrix":
        if len(y_true) != len(y_pred):
            raise ContractViolation(f"{len(y_true)} labels but {len(y_pred)} predictions")
        if len(y_true) == 0:
            return cls.zeros(n_classes)
        return cls(confusion_matrix(y_true, y_pred, labels=list(range(n_classes))))

    @classmethod
    def zeros(cls, n_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((n_classes, n_classes), dtype=np.int64))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.n_classes != other.n_classes:
            raise ContractViolation(f"cannot add {self.n_classes}- and {other.n_classes}-class matrices")
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.counts, other.counts)

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.counts)

    @property
    def support(self) -> np.ndarray:
        """n_i: samples whose true class is i."""
        return self.counts.sum(axis=1)

    @property
    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp

    @property
    def fn(self) -> np.ndarray:
        return self.support - self.tp

    def to_list(self) -> List[List[int]]:
        return self.counts.tolist()

    def to_frame(self, class_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        names = list(class_names) if class_names is not None else [str(i) for i in range(self.n_classes)]
        return pd.DataFrame(
            self.counts,
            index=pd.Index([f"true_{n}" for n in names], name="class"),
            columns=[f"pred_{n}" for n in names],
        )


def _present_classes(cm: ConfusionMatrix, strict: bool, metric: str) -> np.ndarray:
    if cm.total == 0:
        raise ContractViolation(f"{metric} of an empty confusion matrix")
    present = cm.support > 0
    if not present.all():
        absent = np.flatnonzero(~present).tolist()
        if strict:
            raise ContractViolation(f"{metric}: classes {absent} have no samples")
        logger.warning(f"{metric}: classes {absent} have no samples and are excluded from the average")
    return present


def uf1(cm: ConfusionMatrix, strict: bool = False) -> float:
    """Mean over classes of 2 TP / (2 TP + FP + FN)."""
    present = _present_classes(cm, strict, "UF1")
    tp, fp, fn = cm.tp[present], cm.fp[present], cm.fn[present]
    return float(np.mean(2 * tp / (2 * tp + fp + fn)))


def uar(cm: ConfusionMatrix, strict: bool = True) -> float:
    """Mean over classes of TP / n_i."""
    present = _present_classes(cm, strict, "UAR")
    return float(np.mean(cm.tp[present] / cm.support[present]))


def per_class_recall(cm: ConfusionMatrix) -> np.ndarray:
    return np.where(cm.support > 0, cm.tp / np.maximum(cm.support, 1), np.nan)
