"""Exceptions raised by the numeric core and everything built on it."""
from typing import Optional


class NumericCoreError(Exception):
    """Base exception for tensor and serialization errors."""
    pass


class ContractViolation(NumericCoreError):
    """Raised when an operation receives arguments that break its preconditions."""
    pass


class NumericError(NumericCoreError):
    """Raised when a computation produces NaN or Inf from finite inputs."""
    pass


class FormatError(NumericCoreError):
    """Raised when a tensor file or dataset manifest cannot be decoded."""

    def __init__(self, message: str, path: Optional[str] = None, offset: Optional[int] = None):
        self.path = path
        self.offset = offset
        location = ""
        if path is not None:
            location = f" [{path}"
            if offset is not None:
                location += f" @ byte {offset}"
            location += "]"
        super().__init__(f"{message}{location}")
