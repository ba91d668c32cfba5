"""Utilities package."""
from .logger import setup_logger, get_logger
from .helpers import ensure_directory, to_json, write_json, write_jsonl, directory_digest
from .metrics import MetricsRegistry, flop_key, score_key

__all__ = [
    "setup_logger",
    "get_logger",
    "ensure_directory",
    "to_json",
    "write_json",
    "write_jsonl",
    "directory_digest",
    "MetricsRegistry",
    "flop_key",
    "score_key",
]
