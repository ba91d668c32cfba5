"""Thread-safe counters for instrumentation (score calls, FLOPs)."""
import threading
from collections import defaultdict
from typing import Dict, Optional


def score_key(stage: int) -> str:
    return f"scores/stage{stage}"


def flop_key(kind: str, stage: int, layer: int) -> str:
    return f"flops/{kind}/stage{stage}/layer{layer}"


class MetricsRegistry:
    """
    Named numeric counters keyed by ``category/stage/layer`` paths.

    One registry belongs to one forward pass or benchmark run; increments from
    several threads are serialized by a lock.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._counters: Dict[str, float] = defaultdict(float)

    def increment(self, key: str, amount: float = 1.0) -> None:
        with self._lock:
            self._counters[key] += amount

    def get(self, key: str, default: float = 0.0) -> float:
        with self._lock:
            return self._counters.get(key, default)

    def total(self, prefix: str) -> float:
        """Sum of every counter whose key starts with ``prefix``."""
        with self._lock:
            return sum(v for k, v in self._counters.items() if k.startswith(prefix))

    def snapshot(self, prefix: Optional[str] = None) -> Dict[str, float]:
        with self._lock:
            return {
                k: v for k, v in sorted(self._counters.items())
                if prefix is None or k.startswith(prefix)
            }

    def reset(self) -> None:
        with self._lock:
            self._counters.clear()
