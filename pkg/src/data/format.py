"""Dataset directory layout: ``manifest.json`` plus one AMMT file per onset and flow."""
import json
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from src.numeric import FormatError, load_tensor, save_tensor
from src.utils.helpers import ensure_directory, write_json
from src.utils.logger import get_logger

from .synth import Sample

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1


class ManifestEntry(BaseModel):
    id: str
    subject: str
    label: int = Field(ge=0)
    onset: str
    flow: str


class Manifest(BaseModel):
    version: int = FORMAT_VERSION
    n_classes: int = Field(gt=0)
    samples: List[ManifestEntry]


def write_dataset(samples: List[Sample], directory: Union[str, Path], n_classes: Optional[int] = None) -> Path:
    """
    Write ``samples`` under ``directory``; existing files are overwritten.

    Returns:
        Path of the written manifest
    """
    directory = Path(directory)
    for sub in ("onset", "flow"):
        ensure_directory(directory / sub)
    if n_classes is None:
        n_classes = max((s.label for s in samples), default=0) + 1

    entries = []
    for sample in samples:
        onset_rel = f"onset/{sample.id}.ammt"
        flow_rel = f"flow/{sample.id}.ammt"
        save_tensor(directory / onset_rel, sample.onset)
        save_tensor(directory / flow_rel, sample.flow)
        entries.append(ManifestEntry(
            id=sample.id, subject=sample.subject, label=sample.label, onset=onset_rel, flow=flow_rel
        ))

    manifest = Manifest(n_classes=n_classes, samples=entries)
    path = write_json(directory / MANIFEST_NAME, manifest.model_dump())
    logger.info(f"Wrote {len(samples)} samples to {directory}")
    return path


def read_manifest(directory: Union[str, Path]) -> Manifest:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise FormatError("manifest not found", str(path))
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed manifest JSON: {e.msg}", str(path), e.pos)
    try:
        return Manifest.model_validate(raw)
    except ValidationError as e:
        raise FormatError(f"invalid manifest: {e.errors()[0]['msg']} at {e.errors()[0]['loc']}", str(path))


def read_dataset(directory: Union[str, Path]) -> List[Sample]:
    """
    Load every sample listed in the manifest.

    Raises:
        FormatError: On a malformed manifest, a missing file or a corrupt tensor
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    missing = [
        str(directory / rel)
        for entry in manifest.samples
        for rel in (entry.onset, entry.flow)
        if not (directory / rel).exists()
    ]
    if missing:
        raise FormatError(f"manifest references missing files: {', '.join(missing)}", missing[0])

    samples = []
    for entry in manifest.samples:
        if entry.label >= manifest.n_classes:
            raise FormatError(
                f"sample {entry.id} has label {entry.label} >= n_classes {manifest.n_classes}",
                str(directory / MANIFEST_NAME),
            )
        samples.append(Sample(
            id=entry.id,
            subject=entry.subject,
            label=entry.label,
            onset=load_tensor(directory / entry.onset),
            flow=load_tensor(directory / entry.flow),
        ))
    logger.debug(f"Read {len(samples)} samples from {directory}")
    return samples
