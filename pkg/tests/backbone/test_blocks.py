import numpy as np
import pytest

from src.backbone import MultiHeadAttention, SparseBlock, attention_core, msa_block, sssd_block
from src.config import BlockKind, StageConfig
from src.numeric import ContractViolation, Tensor, finite_diff_check, finite_diff_check_parameter, ops
from src.sparse import Mask, importance_scores
from src.utils.metrics import MetricsRegistry

STAGES = StageConfig(layers=[1, 1, 1, 1], channels=[8, 8, 8, 16], d_state=4, heads=2, ffn_expand=2)


def _block(kind=BlockKind.SSSD, d=8, seed=0):
    return SparseBlock(d, kind, STAGES, np.random.default_rng(seed))


def test_dense_block_defines_every_position():
    block = _block()
    x = Tensor(np.random.default_rng(1).normal(size=(1, 8, 8, 8)))
    out = sssd_block(x, 0.0, importance_scores(x), block).numpy()
    assert out.shape == x.shape
    assert np.all(np.abs(out).reshape(-1, 8).sum(axis=1) > 0)


def test_one_kept_window_leaves_the_rest_zero():
    block = _block()
    x = np.random.default_rng(2).normal(size=(1, 8, 8, 8))
    x[0, 4:, 4:] *= 10.0
    out = sssd_block(Tensor(x), 0.8, importance_scores(x), block).numpy()
    assert np.count_nonzero(out[0, 4:, 4:]) > 0
    assert np.count_nonzero(out[0, :4]) == 0
    assert np.count_nonzero(out[0, 4:, :4]) == 0


def test_per_sample_masks_in_a_batch():
    block = _block()
    x = Tensor(np.random.default_rng(3).normal(size=(2, 8, 8, 8)))
    grid = np.array([[[True, False], [False, True]], [[False, True], [True, False]]])
    out = block(x, Mask(grid)).numpy()
    for b in range(2):
        for m in range(2):
            for n in range(2):
                window = out[b, 4 * m:4 * m + 4, 4 * n:4 * n + 4]
                if grid[b, m, n]:
                    assert np.count_nonzero(window) > 0
                else:
                    assert np.count_nonzero(window) == 0


def test_masked_windows_do_not_influence_kept_ones():
    block = _block()
    rng = np.random.default_rng(9)
    x = rng.normal(size=(1, 8, 8, 8))
    mask = Mask(np.array([[[True, True], [False, False]]]))
    changed = x.copy()
    changed[0, 4:] = rng.normal(size=(4, 8, 8))
    np.testing.assert_array_equal(block(Tensor(x), mask).numpy(), block(Tensor(changed), mask).numpy())


def test_wrong_kind_rejected():
    x = Tensor(np.zeros((1, 4, 4, 8)))
    with pytest.raises(ContractViolation):
        msa_block(x, 0.0, np.ones((1, 1, 1)), _block(BlockKind.SSSD))
    with pytest.raises(ContractViolation):
        sssd_block(x, 0.0, np.ones((1, 1, 1)), _block(BlockKind.MSA))


def test_sssd_golden(golden):
    block = SparseBlock(16, BlockKind.SSSD, STAGES, np.random.default_rng(11))
    x = Tensor(np.random.default_rng(12).normal(size=(1, 8, 8, 16)))
    golden("sssd_block_8x8x16", sssd_block(x, 0.0, importance_scores(x), block).numpy(), rtol=1e-4, atol=1e-5)


def test_msa_golden(golden):
    block = SparseBlock(16, BlockKind.MSA, STAGES, np.random.default_rng(13))
    x = Tensor(np.random.default_rng(14).normal(size=(1, 8, 8, 16)))
    golden("msa_block_8x8x16", msa_block(x, 0.5, importance_scores(x), block).numpy(), rtol=1e-4, atol=1e-5)


def test_single_token_attention_returns_values(float64):
    rng = np.random.default_rng(4)
    q, k, v = (Tensor(rng.normal(size=(2, 1, 3))) for _ in range(3))
    np.testing.assert_allclose(attention_core(q, k, v).numpy(), v.numpy())


def test_uniform_attention_averages_values(float64):
    v = Tensor(np.random.default_rng(5).normal(size=(2, 6, 4)))
    zeros = Tensor(np.zeros((2, 6, 4)))
    out = attention_core(zeros, zeros, v).numpy()
    np.testing.assert_allclose(out, np.broadcast_to(v.numpy().mean(axis=1, keepdims=True), out.shape))


def test_attention_shape_and_flops():
    mha = MultiHeadAttention(8, 2, np.random.default_rng(6))
    registry = MetricsRegistry()
    out = mha(Tensor(np.zeros((2, 16, 8))), metrics=registry, flop_key="flops/msa/stage2/layer0")
    assert out.shape == (2, 16, 8)
    assert registry.get("flops/msa/stage2/layer0") == 2 * 4 * 16 * 16 * 8


def test_gradient_through_one_sssd_block(float64):
    rng = np.random.default_rng(7)
    block = _block(seed=8)
    x = Tensor(rng.normal(size=(1, 4, 4, 8)))
    weights = Tensor(rng.normal(size=(1, 4, 4, 8)))
    mask = Mask.full((1, 1, 1))

    def f(t):
        return ops.sum(ops.mul(block(t, mask), weights))

    assert finite_diff_check(f, x) < 1e-3
    for param in (block.mixer.a_proj.weight, block.mixer.b_proj.weight, block.dwconv1.weight, block.fc1.weight):
        assert finite_diff_check_parameter(lambda: f(x), param, max_coords=16, rng=rng) < 1e-3
