"""Synthetic micro-motion data, its on-disk format and in-memory batching."""
from .synth import (
    CLASS_NAMES,
    LANDMARKS,
    Sample,
    class_counts,
    class_template,
    generate_dataset,
    landmark_windows,
)
from .format import Manifest, ManifestEntry, read_dataset, read_manifest, write_dataset
from .dataset import ArrayDataset, Batch

__all__ = [
    "CLASS_NAMES",
    "LANDMARKS",
    "Sample",
    "class_counts",
    "class_template",
    "generate_dataset",
    "landmark_windows",
    "Manifest",
    "ManifestEntry",
    "read_dataset",
    "read_manifest",
    "write_dataset",
    "ArrayDataset",
    "Batch",
]
