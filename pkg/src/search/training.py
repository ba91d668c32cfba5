"""Adaptive training over sampled configurations and fine-tuning under a fixed one."""
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.classifier import AMMSMNet, cls_loss
from src.config import TrainSchedule
from src.data import ArrayDataset, Batch
from src.magnifier import LossSchedule, loss_weight, mag_loss, total_loss
from src.numeric import AdamW, CosineSchedule, GradTape, NumericError, Tensor
from src.utils.logger import get_logger
from src.utils.metrics import MetricsRegistry

from .space import Config, SearchSpace, sample_config

logger = get_logger(__name__)


class TrainingAborted(Exception):
    """Raised when a training step produces a non-finite loss."""

    def __init__(self, message: str, epoch: int, batch: int, config: Config):
        self.epoch = epoch
        self.batch = batch
        self.config = config
        super().__init__(f"{message} (epoch {epoch}, batch {batch}, {config.describe()})")


@dataclass
class EpochRecord:
    phase: str
    epoch: int
    mean_loss: float
    mag_weight: float
    learning_rate: float
    configs: List[Config] = field(default_factory=list)


class Trainer:
    """
    Drives both training phases of one model.

    The optimizer step size follows one cosine decay over every planned step of
    both phases, and the epoch counter feeding the magnification-loss weight
    runs on from adaptive training into fine-tuning.
    """

    def __init__(
        self,
        model: AMMSMNet,
        schedule: TrainSchedule,
        space: SearchSpace,
        steps_per_epoch: int,
        rng: np.random.Generator,
        metrics: Optional[MetricsRegistry] = None,
    ):
        self.model = model
        self.schedule = schedule
        self.space = space
        self.rng = rng
        self.metrics = metrics
        self.steps_per_epoch = max(1, steps_per_epoch)
        self.optimizer = AdamW(model.parameters(), lr=schedule.learning_rate, weight_decay=schedule.weight_decay)
        self.lr_schedule = CosineSchedule(
            schedule.learning_rate,
            total_steps=schedule.total_epochs * self.steps_per_epoch,
            min_lr=schedule.min_learning_rate,
        )
        self.global_epoch = 0
        self.history: List[EpochRecord] = []

    @property
    def uses_mag_loss(self) -> bool:
        return self.model.magnifier is not None

    def _step(self, batch: Batch, config: Config, batch_index: int) -> float:
        with GradTape() as tape:
            try:
                out = self.model.forward(batch.onset, batch.flow, config.ratios, config.alpha, self.metrics)
                loss = cls_loss(out.logits, batch.labels)
                if out.of_mag is not None:
                    l_mag = mag_loss(batch.flow, out.of_mag, config.alpha)
                    loss = total_loss(loss, l_mag, LossSchedule(self.global_epoch, self.schedule.total_epochs))
            except NumericError as e:
                raise TrainingAborted(f"non-finite value in forward pass: {e}", self.global_epoch, batch_index, config)
        value = loss.item()
        if not math.isfinite(value):
            raise TrainingAborted(f"training loss is {value}", self.global_epoch, batch_index, config)

        self.optimizer.zero_grad()
        tape.backward(loss)
        self.optimizer.step(lr=self.lr_schedule(self.optimizer.step_count))
        return value

    def _epoch(self, phase: str, data: ArrayDataset, fixed: Optional[Config]) -> EpochRecord:
        losses, configs = [], []
        for i, batch in enumerate(data.batches(self.schedule.batch_size, self.rng)):
            config = fixed if fixed is not None else sample_config(self.space, self.rng)
            configs.append(config)
            losses.append(self._step(batch, config, i))
        record = EpochRecord(
            phase=phase,
            epoch=self.global_epoch,
            mean_loss=float(np.mean(losses)),
            mag_weight=(
                loss_weight(LossSchedule(self.global_epoch, self.schedule.total_epochs))
                if self.uses_mag_loss else 0.0
            ),
            learning_rate=self.lr_schedule(self.optimizer.step_count),
            configs=configs,
        )
        self.history.append(record)
        logger.info(
            f"{phase} epoch {record.epoch}: loss {record.mean_loss:.4f} "
            f"mag weight {record.mag_weight:.3f} lr {record.learning_rate:.2e}"
        )
        self.global_epoch += 1
        return record

    def adaptive_train(self, data: ArrayDataset) -> AMMSMNet:
        """Train ``adaptive_epochs`` epochs, drawing a fresh configuration per batch."""
        if len(data) == 0:
            raise ValueError("adaptive training needs a non-empty dataset")
        for _ in range(self.schedule.adaptive_epochs):
            self._epoch("adaptive", data, fixed=None)
        return self.model

    def finetune(self, data: ArrayDataset, best: Config) -> AMMSMNet:
        """Train ``finetune_epochs`` epochs with ``best`` held fixed."""
        self.space.validate_config(best)
        if len(data) == 0:
            raise ValueError("fine-tuning needs a non-empty dataset")
        for _ in range(self.schedule.finetune_epochs):
            self._epoch("finetune", data, fixed=best)
        return self.model

    def configs_used(self, phase: Optional[str] = None) -> List[Config]:
        return [c for r in self.history if phase is None or r.phase == phase for c in r.configs]


def validation_loss(model: AMMSMNet, data: ArrayDataset, config: Config, batch_size: int = 8) -> float:
    """Mean classification loss over ``data``; runs without recording gradients."""
    total, count = 0.0, 0
    for batch in data.batches(batch_size):
        out = model.forward(batch.onset, batch.flow, config.ratios, config.alpha)
        total += cls_loss(out.logits, batch.labels).item() * len(batch)
        count += len(batch)
    return total / count


def predict(
    model: AMMSMNet,
    data: ArrayDataset,
    config: Config,
    batch_size: int = 8,
    metrics: Optional[MetricsRegistry] = None,
) -> np.ndarray:
    """Predicted class index per sample, in dataset order."""
    preds = []
    for batch in data.batches(batch_size):
        logits: Tensor = model.forward(batch.onset, batch.flow, config.ratios, config.alpha, metrics).logits
        preds.append(np.argmax(logits.numpy(), axis=-1))
    return np.concatenate(preds).astype(np.int64)
