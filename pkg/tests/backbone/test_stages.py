import numpy as np
import pytest

from src.backbone import Stage, TemporalBackbone, backbone_forward, dense_ssd_flops, stage_resolutions
from src.config import BlockKind, ConfigurationError, StageConfig
from src.numeric import ContractViolation, Tensor
from src.sparse import importance_scores, topk_mask
from src.utils.metrics import MetricsRegistry
from tests.conftest import tiny_stages

RATIOS = [0.5, 0.5, 0.5, 0.5]


def _flow(seed=0, batch=1, side=32):
    return Tensor(np.random.default_rng(seed).normal(size=(batch, side, side, 2)))


def test_stage_resolutions():
    assert stage_resolutions(64) == [16, 8, 4, 2]
    assert stage_resolutions(256) == [64, 32, 16, 8]


def test_default_layout_has_two_msa_blocks_at_the_end_of_stages_three_and_four():
    kinds = StageConfig().block_kinds()
    msa = [(i, j) for i, stage in enumerate(kinds) for j, kind in enumerate(stage) if kind == BlockKind.MSA]
    assert msa == [(2, 3), (3, 1)]
    assert StageConfig().n_pairs == 5


def test_output_dimension_matches_last_stage():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(0))
    stage2, pooled = backbone(_flow(batch=2), RATIOS)
    assert pooled.shape == (2, 16)
    assert stage2.shape == (2, 4, 4, 8)


def test_zero_ratios_match_dense_run_exactly():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(1))
    flow = _flow(seed=2)
    _, sparse = backbone(flow, [0.0] * 4, use_sparse=True)
    _, dense = backbone(flow, [0.0] * 4, use_sparse=False)
    np.testing.assert_array_equal(sparse.numpy(), dense.numpy())


def test_scores_computed_once_per_stage():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(3))
    registry = MetricsRegistry()
    backbone(_flow(seed=4), RATIOS, metrics=registry)
    assert registry.snapshot("scores/") == {f"scores/stage{i}": 1.0 for i in range(4)}


def test_dense_run_does_not_score_windows():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(3))
    registry = MetricsRegistry()
    backbone_forward(_flow(seed=4), backbone, RATIOS, use_sparse=False, metrics=registry)
    assert registry.total("scores/") == 0.0


def test_windows_outside_the_union_are_copied_back():
    rng = np.random.default_rng(5)
    stage = Stage(1, 8, tiny_stages(), np.random.default_rng(6))
    for _ in range(100):
        x = rng.normal(size=(1, 8, 8, 8))
        s = float(rng.choice([0.3, 0.5, 0.8]))
        kept = topk_mask(importance_scores(x), s).upsampled()[..., 0]
        out = stage(Tensor(x), [s]).numpy()
        np.testing.assert_array_equal(out[~kept], x.astype(np.float32)[~kept])


def test_dense_flops_match_closed_form():
    sc = tiny_stages()
    backbone = TemporalBackbone(sc, np.random.default_rng(7))
    registry = MetricsRegistry()
    backbone(_flow(seed=8, batch=2), [0.0] * 4, metrics=registry)
    assert registry.total("flops/sssd/") == dense_ssd_flops(sc, 32, batch_size=2)


def test_sparsity_lowers_ssd_flops():
    sc = tiny_stages()
    backbone = TemporalBackbone(sc, np.random.default_rng(9))
    totals = []
    for s in (0.0, 0.5, 0.8):
        registry = MetricsRegistry()
        backbone(_flow(seed=10), [s] * 4, metrics=registry)
        totals.append(registry.total("flops/sssd/"))
    assert totals[0] > totals[1] > totals[2]


def test_wrong_ratio_count():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        backbone.split_ratios([0.5] * 5)
    assert backbone.split_ratios([0.1, 0.2, 0.3, 0.4]) == [[0.1], [0.2], [0.3], [0.4]]


@pytest.mark.parametrize("side", [24, 16, 40])
def test_bad_resolution(side):
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        backbone(_flow(side=side), RATIOS)


def test_flow_needs_two_channels():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(0))
    with pytest.raises(ContractViolation):
        backbone(Tensor(np.zeros((1, 32, 32, 3))), RATIOS)


def test_fuse_hook_sees_stage_two_output():
    backbone = TemporalBackbone(tiny_stages(), np.random.default_rng(11))
    seen = []

    def hook(x):
        seen.append(x.numpy().copy())
        return x

    stage2, _ = backbone(_flow(seed=12), RATIOS, fuse_hook=hook)
    assert len(seen) == 1
    np.testing.assert_array_equal(seen[0], stage2.numpy())
