"""Base interface for the steps of one LOSO fold."""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional

from src.utils.logger import get_logger


class PhaseStatus(str, Enum):
    """Phase execution status."""
    PENDING = "pending"
    RUNNING = "running"
    SUCCESS = "success"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class PhaseResult:
    """Outcome of one phase: payload for the next step, or the error that stopped it."""
    status: PhaseStatus
    data: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def is_success(self) -> bool:
        return self.status == PhaseStatus.SUCCESS

    def __repr__(self) -> str:
        return f"PhaseResult(status={self.status.value}, data={sorted(self.data)})"


class BasePhase(ABC):
    """
    One step of the fold pipeline.

    Subclasses list the context entries they read in ``required_keys`` and
    implement ``execute``; ``run`` wraps it so that no exception escapes a
    phase. Failures come back as a FAILED result carrying the exception.
    """

    required_keys: ClassVar[List[str]] = []

    def __init__(self, name: Optional[str] = None):
        self.name = name or self.__class__.__name__
        self.logger = get_logger(f"phase.{self.name}")

    @abstractmethod
    def execute(self, context: Dict[str, Any]) -> PhaseResult:
        """
        Run the phase body.

        Args:
            context: Fold state plus phase-specific entries

        Returns:
            PhaseResult with execution outcome
        """

    def validate_context(self, context: Dict[str, Any]) -> None:
        """
        Raises:
            ValueError: If a required entry is missing or None
        """
        missing = [key for key in self.required_keys if context.get(key) is None]
        if missing:
            raise ValueError(f"{self.name} missing required context keys: {', '.join(missing)}")

    def run(self, context: Dict[str, Any]) -> PhaseResult:
        self.logger.info(f"Starting {self.name}")
        try:
            self.validate_context(context)
            result = self.execute(context)
        except Exception as e:
            self.logger.error(f"{self.name} failed: {e}", exc_info=True)
            return PhaseResult(
                status=PhaseStatus.FAILED,
                error=f"{self.name}: {e}",
                metadata={"exception_type": type(e).__name__, "exception": e},
            )
        if result.is_success():
            self.logger.info(f"{self.name} completed")
        else:
            self.logger.warning(f"{self.name} finished with status {result.status.value}")
        return result


class PhaseError(Exception):
    """Raised when a fold pipeline stops before producing predictions."""
