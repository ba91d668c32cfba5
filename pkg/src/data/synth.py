"""Procedural micro-motion samples: a face-like onset image plus ground-truth flow.

Class motion is a sum of Gaussian displacement bumps at fixed facial landmarks;
a rigid global drift and white noise are added on top. Landmarks sit at fixed
fractions of the image side, so the windows carrying class evidence are known.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Set, Tuple, Union

import numpy as np
from pydantic import ValidationError

from src.config import ConfigurationError, SyntheticSpec
from src.utils.logger import get_logger

logger = get_logger(__name__)

CLASS_NAMES: Dict[int, Tuple[str, ...]] = {
    3: ("positive", "negative", "surprise"),
    5: ("happiness", "depression", "disgust", "surprise", "others"),
}

# (row, col) as fractions of the image side
LANDMARKS: Dict[str, Tuple[float, float]] = {
    "left_brow": (0.30, 0.34),
    "right_brow": (0.30, 0.66),
    "left_eye": (0.40, 0.36),
    "right_eye": (0.40, 0.64),
    "nose": (0.56, 0.50),
    "left_mouth_corner": (0.72, 0.38),
    "right_mouth_corner": (0.72, 0.62),
    "lower_lip": (0.78, 0.50),
}

# class -> [(landmark, (d_row, d_col))]; displacement directions in flow units
TEMPLATES: Dict[int, Dict[int, List[Tuple[str, Tuple[float, float]]]]] = {
    3: {
        0: [("left_mouth_corner", (-1.0, -0.5)), ("right_mouth_corner", (-1.0, 0.5))],
        1: [("left_brow", (1.0, 0.4)), ("right_brow", (1.0, -0.4))],
        2: [("left_brow", (-1.0, 0.0)), ("right_brow", (-1.0, 0.0)), ("lower_lip", (1.0, 0.0))],
    },
    5: {
        0: [("left_mouth_corner", (-1.0, -0.5)), ("right_mouth_corner", (-1.0, 0.5))],
        1: [("left_mouth_corner", (1.0, 0.0)), ("right_mouth_corner", (1.0, 0.0))],
        2: [("nose", (-1.0, 0.0)), ("lower_lip", (-0.5, 0.0))],
        3: [("left_brow", (-1.0, 0.0)), ("right_brow", (-1.0, 0.0)), ("lower_lip", (1.0, 0.0))],
        4: [("left_brow", (-1.0, 0.0))],
    },
}

STAGE1_STRIDE = 4
WINDOW = 4


@dataclass(frozen=True)
class Sample:
    id: str
    subject: str
    label: int
    onset: np.ndarray
    flow: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.id == other.id
            and self.subject == other.subject
            and self.label == other.label
            and self.onset.dtype == other.onset.dtype
            and np.array_equal(self.onset, other.onset)
            and np.array_equal(self.flow, other.flow)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class FaceGeometry:
    """Per-subject jitter of the face layout, in pixels."""
    center: Tuple[float, float]
    radii: Tuple[float, float]
    shift: Tuple[float, float]
    brightness: float


def _grid(resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    coords = np.arange(resolution, dtype=np.float64)
    return np.meshgrid(coords, coords, indexing="ij")


def _subject_geometry(resolution: int, rng: np.random.Generator) -> FaceGeometry:
    r = float(resolution)
    return FaceGeometry(
        center=(r * (0.52 + rng.uniform(-0.02, 0.02)), r * (0.5 + rng.uniform(-0.02, 0.02))),
        radii=(r * rng.uniform(0.40, 0.46), r * rng.uniform(0.32, 0.38)),
        shift=(rng.uniform(-0.015, 0.015) * r, rng.uniform(-0.015, 0.015) * r),
        brightness=float(rng.uniform(0.55, 0.75)),
    )


def landmark_position(name: str, resolution: int, shift: Tuple[float, float] = (0.0, 0.0)) -> Tuple[float, float]:
    fr, fc = LANDMARKS[name]
    return fr * resolution + shift[0], fc * resolution + shift[1]


def render_onset(geometry: FaceGeometry, resolution: int) -> np.ndarray:
    """Ellipse head, two eye blobs and a mouth bar; H x W x 3 in [0, 1]."""
    rows, cols = _grid(resolution)
    (cy, cx), (ry, rx) = geometry.center, geometry.radii
    head = (((rows - cy) / ry) ** 2 + ((cols - cx) / rx) ** 2) <= 1.0
    gray = np.where(head, geometry.brightness, 0.1)

    blob_sigma = resolution / 32.0
    for eye in ("left_eye", "right_eye"):
        ey, ex = landmark_position(eye, resolution, geometry.shift)
        gray -= 0.45 * np.exp(-((rows - ey) ** 2 + (cols - ex) ** 2) / (2 * blob_sigma ** 2))

    ly, lx_left = landmark_position("left_mouth_corner", resolution, geometry.shift)
    _, lx_right = landmark_position("right_mouth_corner", resolution, geometry.shift)
    mouth = (np.abs(rows - ly) <= resolution / 48.0) & (cols >= lx_left) & (cols <= lx_right)
    gray = np.where(mouth, 0.2, gray)

    gray = np.clip(gray, 0.0, 1.0)
    tint = np.array([1.0, 0.85, 0.75])
    return np.clip(gray[..., None] * tint, 0.0, 1.0)


def class_template(label: int, n_classes: int, resolution: int, shift: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Unit-amplitude H x W x 2 displacement of one class."""
    rows, cols = _grid(resolution)
    sigma = resolution / 24.0
    flow = np.zeros((resolution, resolution, 2))
    for name, (d_row, d_col) in TEMPLATES[n_classes][label]:
        ly, lx = landmark_position(name, resolution, shift)
        bump = np.exp(-((rows - ly) ** 2 + (cols - lx) ** 2) / (2 * sigma ** 2))
        flow[..., 0] += d_row * bump
        flow[..., 1] += d_col * bump
    return flow


def landmark_windows(label: int, n_classes: int, resolution: int) -> Set[Tuple[int, int]]:
    """
    Stage-1 window coordinates (m, n) that contain a landmark moved by ``label``.

    A stage-1 window spans STAGE1_STRIDE * WINDOW input pixels per side.
    """
    span = STAGE1_STRIDE * WINDOW
    windows = set()
    for name, _ in TEMPLATES[n_classes][label]:
        ly, lx = landmark_position(name, resolution)
        windows.add((int(ly // span), int(lx // span)))
    return windows


def _coerce_spec(spec: Union[SyntheticSpec, dict]) -> SyntheticSpec:
    if isinstance(spec, SyntheticSpec):
        return spec
    try:
        return SyntheticSpec(**spec)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid synthetic dataset spec: {e}")


def generate_dataset(spec: Union[SyntheticSpec, dict]) -> List[Sample]:
    """
    Generate every sample of ``spec``, ordered by subject, class, repetition.

    Raises:
        ConfigurationError: If the SyntheticSpec is invalid
    """
    spec = _coerce_spec(spec)
    if spec.n_classes not in TEMPLATES:
        raise ConfigurationError(f"no class templates for {spec.n_classes} classes")
    rng = np.random.default_rng(spec.seed)
    res = spec.resolution
    samples: List[Sample] = []
    for subject in range(spec.n_subjects):
        subject_id = f"s{subject + 1:02d}"
        geometry = _subject_geometry(res, rng)
        onset = render_onset(geometry, res)
        for label in range(spec.n_classes):
            template = class_template(label, spec.n_classes, res, geometry.shift)
            for rep in range(spec.samples_per_subject_per_class):
                intensity = rng.uniform(0.75, 1.25)
                angle = rng.uniform(0.0, 2.0 * np.pi)
                drift = np.array([np.sin(angle), np.cos(angle)])
                noise = rng.standard_normal((res, res, 2))
                flow = (
                    template * (spec.motion_amplitude * intensity)
                    + drift * spec.distractor_amplitude
                    + noise * spec.noise_std
                )
                samples.append(Sample(
                    id=f"{subject_id}_c{label}_{rep:02d}",
                    subject=subject_id,
                    label=label,
                    onset=onset.astype(np.float32),
                    flow=flow.astype(np.float32),
                ))
    logger.info(
        f"Generated {len(samples)} samples ({spec.n_subjects} subjects x {spec.n_classes} classes "
        f"x {spec.samples_per_subject_per_class})"
    )
    return samples


def class_counts(samples: Sequence[Sample]) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    for s in samples:
        counts[s.label] = counts.get(s.label, 0) + 1
    return dict(sorted(counts.items()))
