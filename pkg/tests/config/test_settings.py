import json
from pathlib import Path

import pytest

from src.config import (
    BackboneKind,
    BlockKind,
    ConfigurationError,
    ModelConfig,
    StageConfig,
    StagePreset,
    TrainSchedule,
    apply_overrides,
    load_settings,
    require_dataset,
)
from src.config.settings import parse_override

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


def test_defaults_without_file():
    settings = load_settings()
    assert settings.data.resolution == 64
    assert settings.schedule.total_epochs == 30
    assert settings.model.stage_config().n_pairs == 5
    assert settings.search.ga.population == 16


@pytest.mark.parametrize("name", ["default.json", "tiny.json", "ablation.json"])
def test_shipped_configs_validate(name):
    settings = load_settings(CONFIG_DIR / name)
    assert settings.data.resolution % 16 == 0


def test_overrides_are_typed():
    settings = load_settings(overrides=["schedule.adaptive_epochs=3", "model.use_sparse=false", "search.ga.elite=1"])
    assert settings.schedule.adaptive_epochs == 3
    assert settings.model.use_sparse is False
    assert settings.search.ga.elite == 1


def test_override_list_value():
    settings = load_settings(overrides=["bench.variants=[0.0, 0.5]"])
    assert settings.bench.variants == [0.0, 0.5]


def test_apply_overrides_leaves_input_untouched():
    raw = {"schedule": {"batch_size": 4}}
    merged = apply_overrides(raw, ["schedule.batch_size=2", "seed=7"])
    assert raw == {"schedule": {"batch_size": 4}}
    assert merged == {"schedule": {"batch_size": 2}, "seed": 7}


@pytest.mark.parametrize("override", ["schedule.batch_size", "=3", "seed=[1"])
def test_malformed_override(override):
    with pytest.raises(ConfigurationError):
        parse_override(override)


def test_override_into_scalar():
    with pytest.raises(ConfigurationError):
        apply_overrides({"seed": 1}, ["seed.value=2"])


@pytest.mark.parametrize("override", [
    "data.resolution=40",
    "search.ga.elite=16",
    "search.alpha_choices=[0.5]",
    "bench.variants=[1.0]",
    "logging.level=LOUD",
    "model.stages.layers=[1, 2, 3]",
])
def test_invalid_values(override):
    with pytest.raises(ConfigurationError):
        load_settings(overrides=[override])


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigurationError):
        load_settings(tmp_path / "absent.json")
    bad = tmp_path / "bad.yaml"
    bad.write_text("data: [unclosed")
    with pytest.raises(ConfigurationError):
        load_settings(bad)
    scalar = tmp_path / "scalar.json"
    scalar.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigurationError):
        load_settings(scalar)


def test_require_dataset(tmp_path):
    settings = load_settings(overrides=[f"data.dataset_dir={tmp_path}"])
    with pytest.raises(ConfigurationError):
        require_dataset(settings)
    (tmp_path / "manifest.json").write_text("{}")
    assert require_dataset(settings) == tmp_path


def test_stage_layout():
    full = StageConfig.preset(StagePreset.FULL)
    assert full.layers == [2, 4, 8, 4] and full.n_pairs == 9
    desk = StageConfig()
    assert [desk.pair_slot(3, j) for j in range(2)] == [4, 4]
    assert desk.pair_slot(2, 3) == 3


def test_attention_backbone_is_all_msa():
    sc = ModelConfig(backbone=BackboneKind.ATTENTION).stage_config()
    assert all(kind == BlockKind.MSA for stage in sc.block_kinds() for kind in stage)


def test_full_scale_schedule():
    schedule = TrainSchedule.full_scale()
    assert schedule.total_epochs == 100 and schedule.batch_size == 16
