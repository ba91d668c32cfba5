"""Magnification loss and the epoch-scheduled total loss."""
from dataclasses import dataclass
from typing import Union

from src.config import ConfigurationError
from src.numeric import ContractViolation, Tensor, as_tensor, ops

Scalar = Union[float, Tensor]


@dataclass(frozen=True)
class LossSchedule:
    """Position in training: ``epoch`` (0-based) out of ``total_epochs`` planned."""
    epoch: int
    total_epochs: int

    def __post_init__(self) -> None:
        if self.total_epochs < 0:
            raise ConfigurationError(f"total_epochs must be non-negative, got {self.total_epochs}")
        if not 0 <= self.epoch <= max(self.total_epochs, 0):
            raise ContractViolation(f"epoch {self.epoch} outside [0, {self.total_epochs}]")


def mag_loss(of_ori: Tensor, of_mag: Tensor, alpha: float) -> Tensor:
    """Mean absolute deviation between alpha * OF_ori and OF_mag."""
    if of_ori.shape != of_mag.shape:
        raise ContractViolation(f"mag_loss: flow shapes {of_ori.shape} and {of_mag.shape} differ")
    return ops.mean(ops.abs(ops.sub(ops.mul(of_ori, alpha), of_mag)))


def loss_weight(sched: LossSchedule) -> float:
    """(e_r - e) / e_r."""
    if sched.total_epochs == 0:
        raise ConfigurationError("loss schedule has zero total epochs")
    return (sched.total_epochs - sched.epoch) / sched.total_epochs


def total_loss(l_cls: Scalar, l_mag: Scalar, sched: LossSchedule) -> Tensor:
    """l_cls + loss_weight(sched) * l_mag."""
    l_cls = as_tensor(l_cls)
    l_mag = as_tensor(l_mag, like=l_cls)
    if l_cls.size != 1 or l_mag.size != 1:
        raise ContractViolation(f"total_loss needs scalar losses, got {l_cls.shape} and {l_mag.shape}")
    if l_cls.item() < 0 or l_mag.item() < 0:
        raise ContractViolation(f"losses must be non-negative, got l_cls={l_cls.item()}, l_mag={l_mag.item()}")
    return ops.add(l_cls, ops.mul(l_mag, loss_weight(sched)))
