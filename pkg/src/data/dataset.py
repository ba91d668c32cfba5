"""In-memory stacked dataset and mini-batch iteration."""
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np

from src.numeric import ContractViolation, Tensor

from .synth import Sample


@dataclass
class Batch:
    onset: Tensor
    flow: Tensor
    labels: np.ndarray
    ids: List[str]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class ArrayDataset:
    """Samples stacked along the leading axis, NHWC."""
    ids: List[str]
    subjects: List[str]
    labels: np.ndarray
    onset: np.ndarray
    flow: np.ndarray
    n_classes: int

    def __post_init__(self) -> None:
        n = len(self.ids)
        if not (len(self.subjects) == len(self.labels) == len(self.onset) == len(self.flow) == n):
            raise ContractViolation("dataset fields have inconsistent lengths")

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], n_classes: Optional[int] = None) -> "ArrayDataset":
        if not samples:
            raise ContractViolation("cannot build a dataset from zero samples")
        if n_classes is None:
            n_classes = max(s.label for s in samples) + 1
        return cls(
            ids=[s.id for s in samples],
            subjects=[s.subject for s in samples],
            labels=np.array([s.label for s in samples], dtype=np.int64),
            onset=np.stack([s.onset for s in samples]),
            flow=np.stack([s.flow for s in samples]),
            n_classes=n_classes,
        )

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def resolution(self) -> int:
        return int(self.flow.shape[1])

    def subject_ids(self) -> List[str]:
        """Distinct subjects in first-appearance order."""
        return list(dict.fromkeys(self.subjects))

    def subset(self, indices: Sequence[int]) -> "ArrayDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return ArrayDataset(
            ids=[self.ids[i] for i in idx],
            subjects=[self.subjects[i] for i in idx],
            labels=self.labels[idx],
            onset=self.onset[idx],
            flow=self.flow[idx],
            n_classes=self.n_classes,
        )

    def by_subjects(self, subjects: Sequence[str]) -> "ArrayDataset":
        wanted = set(subjects)
        return self.subset([i for i, s in enumerate(self.subjects) if s in wanted])

    def batches(self, batch_size: int, rng: Optional[np.random.Generator] = None) -> Iterator[Batch]:
        """Yield mini-batches; shuffled when ``rng`` is given. The last batch may be short."""
        if batch_size <= 0:
            raise ContractViolation(f"batch_size must be positive, got {batch_size}")
        order = rng.permutation(len(self)) if rng is not None else np.arange(len(self))
        for start in range(0, len(self), batch_size):
            idx = order[start:start + batch_size]
            yield Batch(
                onset=Tensor(self.onset[idx]),
                flow=Tensor(self.flow[idx]),
                labels=self.labels[idx],
                ids=[self.ids[i] for i in idx],
            )

    def n_batches(self, batch_size: int) -> int:
        return -(-len(self) // batch_size)
