import numpy as np
import pytest

from src.config import ConfigurationError, SyntheticSpec
from src.data import CLASS_NAMES, class_counts, class_template, generate_dataset, landmark_windows


def test_default_counts():
    samples = generate_dataset(SyntheticSpec())
    assert len(samples) == 60
    assert class_counts(samples) == {0: 20, 1: 20, 2: 20}
    assert samples[0].id == "s01_c0_00"
    assert samples[0].onset.shape == (64, 64, 3) and samples[0].flow.shape == (64, 64, 2)
    assert samples[0].flow.dtype == np.float32


def test_five_class_variant():
    samples = generate_dataset({"n_subjects": 2, "n_classes": 5, "samples_per_subject_per_class": 1, "resolution": 32})
    assert class_counts(samples) == {c: 2 for c in range(5)}
    assert len(CLASS_NAMES[5]) == 5


def test_zero_amplitudes_give_zero_flow():
    samples = generate_dataset({
        "n_subjects": 2, "resolution": 32, "motion_amplitude": 0.0, "distractor_amplitude": 0.0, "noise_std": 0.0,
    })
    assert all(not s.flow.any() for s in samples)


def test_same_seed_same_samples():
    spec = {"n_subjects": 2, "resolution": 32, "seed": 5}
    assert generate_dataset(spec) == generate_dataset(spec)
    assert generate_dataset(spec) != generate_dataset({**spec, "seed": 6})


def test_onset_shared_within_subject():
    samples = generate_dataset({"n_subjects": 2, "resolution": 32})
    by_subject = {}
    for s in samples:
        by_subject.setdefault(s.subject, []).append(s.onset)
    for onsets in by_subject.values():
        assert all(np.array_equal(onsets[0], o) for o in onsets)
    assert 0.0 <= samples[0].onset.min() and samples[0].onset.max() <= 1.0


@pytest.mark.parametrize("resolution", [40, 30])
def test_bad_resolution(resolution):
    with pytest.raises(ConfigurationError):
        generate_dataset({"resolution": resolution})


def test_global_drift_dominates_most_pixels():
    samples = generate_dataset({"n_subjects": 1, "noise_std": 0.0})
    for s in samples:
        magnitude = np.linalg.norm(s.flow, axis=-1)
        assert np.median(magnitude) == pytest.approx(0.6, abs=0.01)


@pytest.mark.parametrize("label", [0, 1])
def test_class_motion_peaks_in_landmark_windows(label):
    samples = generate_dataset({"n_subjects": 3, "distractor_amplitude": 0.0, "noise_std": 0.0})
    span = 16
    for s in (s for s in samples if s.label == label):
        energy = (s.flow ** 2).sum(axis=-1).reshape(4, span, 4, span).sum(axis=(1, 3))
        peak = np.unravel_index(np.argmax(energy), energy.shape)
        assert tuple(int(i) for i in peak) in landmark_windows(label, 3, 64)


def test_templates_are_distinct():
    templates = [class_template(c, 3, 32) for c in range(3)]
    for a in range(3):
        for b in range(a + 1, 3):
            assert np.abs(templates[a] - templates[b]).max() > 0.5


def test_nearest_centroid_separates_classes():
    samples = generate_dataset({"n_subjects": 4, "seed": 1})
    subjects = sorted({s.subject for s in samples})

    def features(s):
        flow = s.flow - s.flow.mean(axis=(0, 1))
        return flow.reshape(-1)

    correct = 0
    for held_out in subjects:
        train = [s for s in samples if s.subject != held_out]
        centroids = np.stack([np.mean([features(s) for s in train if s.label == c], axis=0) for c in range(3)])
        for s in (s for s in samples if s.subject == held_out):
            correct += int(np.argmin(((centroids - features(s)) ** 2).sum(axis=1)) == s.label)
    assert correct / len(samples) >= 0.9
