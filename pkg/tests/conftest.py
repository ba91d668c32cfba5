"""Shared fixtures: tiny model/dataset builders, precision switch, golden files."""
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from src.classifier import AMMSMNet
from src.config import ModelConfig, RunConfig, StageConfig, load_settings
from src.data import ArrayDataset, generate_dataset
from src.numeric import precision

GOLDEN_DIR = Path(__file__).parent / "golden"
CONFIG_DIR = Path(__file__).resolve().parents[1] / "config"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def float64():
    """Run the test body with float64 tensors."""
    with precision("float64") as dtype:
        yield dtype


def tiny_stages() -> StageConfig:
    """Four stages, two MSA blocks (last layer of stages 3 and 4), four ratio slots."""
    return StageConfig(layers=[1, 2, 2, 1], channels=[8, 8, 16, 16], d_state=4, heads=2, ffn_expand=2)


def tiny_model_config(**updates) -> ModelConfig:
    config = ModelConfig(stages=tiny_stages(), magnifier_channels=[4, 8], spatial_channels=[4, 8])
    return config.model_copy(update=updates)


@pytest.fixture
def model_factory() -> Callable[..., AMMSMNet]:
    def build(seed: int = 0, n_classes: int = 3, **updates) -> AMMSMNet:
        return AMMSMNet(tiny_model_config(**updates), n_classes, np.random.default_rng(seed))

    return build


@pytest.fixture
def tiny_samples():
    return generate_dataset({
        "n_subjects": 3,
        "n_classes": 3,
        "samples_per_subject_per_class": 2,
        "resolution": 32,
        "seed": 0,
    })


@pytest.fixture
def tiny_dataset(tiny_samples) -> ArrayDataset:
    return ArrayDataset.from_samples(tiny_samples, n_classes=3)


@pytest.fixture
def tiny_settings(tmp_path) -> RunConfig:
    return RunConfig(
        data={
            "dataset_dir": str(tmp_path / "data"),
            "n_subjects": 3,
            "n_classes": 3,
            "samples_per_subject_per_class": 2,
            "resolution": 32,
        },
        model=tiny_model_config().model_dump(),
        search={"ga": {"population": 4, "generations": 1, "elite": 1, "tournament": 2}},
        schedule={"adaptive_epochs": 1, "finetune_epochs": 1, "batch_size": 4},
        eval={"write_chart": False},
        bench={"variants": [0.0, 0.5], "warmup": 0, "repeats": 1, "batch_size": 1},
        logging={"level": "WARNING"},
        output_dir=str(tmp_path / "out"),
    )


@pytest.fixture
def golden() -> Callable[[str, np.ndarray], None]:
    """
    Compare against tests/golden/<name>.npy.

    The first run records the file; later runs must reproduce it.
    """
    def check(name: str, value: np.ndarray, rtol: float = 1e-5, atol: float = 1e-6) -> None:
        path = GOLDEN_DIR / f"{name}.npy"
        value = np.asarray(value)
        if not path.exists():
            GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
            np.save(path, value)
            return
        expected = np.load(path)
        assert expected.shape == value.shape
        np.testing.assert_allclose(value, expected, rtol=rtol, atol=atol)

    return check


@pytest.fixture
def ablation_settings(tmp_path) -> Callable[[int], RunConfig]:
    """Settings from config/ablation.json with the given seed, writing under tmp_path."""
    def build(seed: int) -> RunConfig:
        return load_settings(
            CONFIG_DIR / "ablation.json",
            [
                f"seed={seed}",
                f"output_dir={tmp_path / f'out{seed}'}",
                f"data.dataset_dir={tmp_path / 'data'}",
                "logging.level=WARNING",
            ],
        )
    return build
