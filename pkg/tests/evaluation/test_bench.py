import numpy as np
import pytest

from src.backbone import dense_ssd_flops
from src.classifier import AMMSMNet
from src.config import BenchConfig, ModelConfig
from src.evaluation import bench, count_flops
from tests.conftest import tiny_stages


def test_dense_flops_match_closed_form(model_factory):
    model = model_factory()
    flops = count_flops(model, [0.0] * 4, resolution=32, batch_size=2)
    ssd = sum(v for k, v in flops.items() if k.startswith("flops/sssd/"))
    assert ssd == dense_ssd_flops(tiny_stages(), 32)


def test_flops_fall_with_sparsity(model_factory):
    model = model_factory()
    totals = [sum(count_flops(model, [s] * 4, resolution=64).values()) for s in (0.0, 0.25, 0.5, 0.75)]
    assert all(a >= b for a, b in zip(totals, totals[1:]))
    assert totals[0] > totals[-1]


def test_dense_model_ignores_ratios(model_factory):
    model = model_factory(use_sparse=False)
    assert count_flops(model, [0.0] * 4, 32) == count_flops(model, [0.75] * 4, 32)


def test_bench_reports_every_variant(model_factory):
    model = model_factory()
    reports = bench(model, BenchConfig(variants=[0.0, 0.5], warmup=0, repeats=2, batch_size=1), resolution=32)
    assert [r.sparsity for r in reports] == [0.0, 0.5]
    assert all(r.latency_ms > 0 for r in reports)
    assert reports[0].ratios == [0.0] * 4
    assert set(reports[0].stage_ratio) == {"stage0", "stage1", "stage2", "stage3"}
    assert reports[0].stage_ratio["stage0"] == 1.0
    assert reports[1].stage_ratio["stage0"] < 1.0
    row = reports[1].to_row()
    assert row["mixer_flops"] == row["ssd_flops"] + row["msa_flops"]


def test_bench_resolution_override(model_factory):
    model = model_factory()
    reports = bench(model, BenchConfig(variants=[0.0], warmup=0, repeats=1, batch_size=1, resolution=64), resolution=32)
    assert reports[0].resolution == 64


@pytest.mark.slow
def test_half_sparsity_halves_ssd_flops_at_full_resolution():
    model = AMMSMNet(ModelConfig(use_magnifier=False), 3, np.random.default_rng(0))
    dense = count_flops(model, [0.0] * model.n_slots, resolution=256)
    half = count_flops(model, [0.5] * model.n_slots, resolution=256)
    ssd = lambda flops: sum(v for k, v in flops.items() if k.startswith("flops/sssd/"))  # noqa: E731
    assert ssd(half) / ssd(dense) == pytest.approx(0.5, rel=0.05)


@pytest.mark.slow
def test_half_sparsity_is_faster_than_dense_at_full_resolution():
    model = AMMSMNet(ModelConfig(use_magnifier=False), 3, np.random.default_rng(0))
    settings = BenchConfig(variants=[0.0, 0.5], warmup=2, repeats=10, batch_size=1, resolution=256)
    dense, half = bench(model, settings, resolution=256)
    assert half.latency_ms < dense.latency_ms
