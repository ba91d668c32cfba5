import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from src.cli import EXIT_CONFIG, cli


@pytest.fixture
def config_file(tiny_settings, tmp_path) -> Path:
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_settings.model_dump(mode="json")))
    return path


def _invoke(*args):
    return CliRunner().invoke(cli, [str(a) for a in args])


def test_synth_writes_the_dataset(config_file, tiny_settings):
    result = _invoke("synth", "--config", config_file)
    assert result.exit_code == 0, result.output
    manifest = json.loads((Path(tiny_settings.data.dataset_dir) / "manifest.json").read_text())
    assert len(manifest["samples"]) == 18


def test_bad_resolution_is_a_configuration_error(config_file):
    result = _invoke("synth", "--config", config_file, "--set", "data.resolution=40")
    assert result.exit_code == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert _invoke("synth", "--config", tmp_path / "absent.json").exit_code == EXIT_CONFIG


def test_run_without_dataset(config_file):
    result = _invoke("run", "--config", config_file)
    assert result.exit_code == EXIT_CONFIG
    assert "synth" in result.output


def test_run_is_reproducible(config_file, tiny_settings):
    assert _invoke("synth", "--config", config_file).exit_code == 0
    report_path = Path(tiny_settings.output_dir) / "run_report.json"

    first = _invoke("run", "--config", config_file)
    assert first.exit_code == 0, first.output
    first_bytes = report_path.read_bytes()
    second = _invoke("run", "--config", config_file)
    assert second.exit_code == 0, second.output
    assert report_path.read_bytes() == first_bytes

    report = json.loads(first_bytes)
    assert [f["subject"] for f in report["per_fold"]] == ["s01", "s02", "s03"]
    assert 0.0 <= report["pooled"]["uar"] <= 1.0
    assert sum(map(sum, report["pooled"]["confusion"])) == 18
    assert (Path(tiny_settings.output_dir) / "confusion.csv").exists()
    assert (Path(tiny_settings.output_dir) / "checkpoints" / "fold-s02.json").exists()


def test_eval_reloads_a_fold_checkpoint(config_file, tiny_settings):
    assert _invoke("synth", "--config", config_file).exit_code == 0
    assert _invoke("run", "--config", config_file).exit_code == 0
    out = Path(tiny_settings.output_dir)
    result = _invoke("eval", "--config", config_file, "--checkpoint", out / "checkpoints" / "fold-s01.json",
                     "--subject-only")
    assert result.exit_code == 0, result.output
    report = json.loads((out / "eval_report.json").read_text())
    run_report = json.loads((out / "run_report.json").read_text())
    assert report["n_samples"] == 6
    assert report["confusion"] == run_report["per_fold"][0]["confusion"]


def test_eval_draws_the_flow_figure(config_file, tiny_settings):
    assert _invoke("synth", "--config", config_file).exit_code == 0
    assert _invoke("run", "--config", config_file).exit_code == 0
    out = Path(tiny_settings.output_dir)
    result = _invoke("eval", "--config", config_file, "--checkpoint", out / "checkpoints" / "fold-s01.json",
                     "--set", "eval.write_chart=true")
    assert result.exit_code == 0, result.output
    assert (out / "flow.svg").read_bytes().startswith(b"<?xml")


def test_eval_with_corrupt_checkpoint(config_file, tiny_settings, tmp_path):
    assert _invoke("synth", "--config", config_file).exit_code == 0
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert _invoke("eval", "--config", config_file, "--checkpoint", broken).exit_code == EXIT_CONFIG


def test_bench_writes_json_and_csv(config_file, tiny_settings):
    result = _invoke("bench", "--config", config_file)
    assert result.exit_code == 0, result.output
    out = Path(tiny_settings.output_dir)
    report = json.loads((out / "bench_report.json").read_text())
    assert [b["sparsity"] for b in report["bench"]] == [0.0, 0.5]
    assert report["bench"][0]["ssd_flops"] > report["bench"][1]["ssd_flops"]
    assert (out / "bench_report.csv").exists()
