import json

import numpy as np
import pandas as pd
import pytest

from src.config import BenchConfig
from src.evaluation import (
    ConfusionMatrix,
    bench,
    write_bench_csv,
    write_confusion_csv,
    write_flow_figure,
    write_latency_chart,
    write_metrics_chart,
    write_report,
)
from src.numeric import ContractViolation


def test_report_json_is_deterministic(tmp_path):
    payload = {"b": 1, "a": [0.5, 2]}
    first = write_report(tmp_path / "one" / "report.json", payload).read_bytes()
    second = write_report(tmp_path / "two" / "report.json", dict(reversed(list(payload.items())))).read_bytes()
    assert first == second
    assert json.loads(first) == payload


def test_confusion_csv(tmp_path):
    cm = ConfusionMatrix.from_predictions([0, 1, 2], [0, 2, 2], 3)
    path = write_confusion_csv(tmp_path / "confusion.csv", cm, ["positive", "negative", "surprise"])
    frame = pd.read_csv(path, index_col=0)
    assert frame.loc["true_negative", "pred_surprise"] == 1
    assert frame.values.sum() == 3


def test_metrics_chart_is_reproducible(tmp_path):
    metrics = {"s01": {"uf1": 0.5, "uar": 0.6}, "s02": {"uf1": 0.7, "uar": 0.8}}
    a = write_metrics_chart(tmp_path / "a.svg", metrics).read_bytes()
    b = write_metrics_chart(tmp_path / "b.svg", metrics).read_bytes()
    assert a.startswith(b"<?xml") and a == b


def test_bench_outputs(tmp_path, model_factory):
    reports = bench(model_factory(), BenchConfig(variants=[0.0, 0.5], warmup=0, repeats=1, batch_size=1), 32)
    frame = pd.read_csv(write_bench_csv(tmp_path / "bench.csv", reports))
    assert list(frame["sparsity"]) == [0.0, 0.5]
    assert {"ssd_flops", "msa_flops", "mixer_flops", "latency_ms"} <= set(frame.columns)
    assert write_latency_chart(tmp_path / "latency.svg", reports).exists()


def test_flow_figure_is_reproducible(tmp_path):
    of_ori = np.random.default_rng(0).normal(size=(16, 16, 2))
    a = write_flow_figure(tmp_path / "a.svg", of_ori, 2.0 * of_ori, alpha=2.0).read_bytes()
    b = write_flow_figure(tmp_path / "b.svg", of_ori, 2.0 * of_ori, alpha=2.0).read_bytes()
    assert a.startswith(b"<?xml") and a == b


def test_flow_figure_rejects_mismatched_flows(tmp_path):
    with pytest.raises(ContractViolation):
        write_flow_figure(tmp_path / "f.svg", np.zeros((8, 8, 2)), np.zeros((8, 4, 2)), alpha=1.0)
