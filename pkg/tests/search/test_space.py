import numpy as np
import pytest

from src.config import ConfigurationError, ModelConfig, SearchConfig
from src.search import Config, FitnessRecord, SearchSpace, sample_config


def test_default_space_size():
    space = SearchSpace()
    assert space.size == 8 ** 5 * 7
    assert space.n_slots == 5


def test_same_seed_same_draws():
    space = SearchSpace()
    assert sample_config(space, np.random.default_rng(42)) == sample_config(space, np.random.default_rng(42))
    rng_a, rng_b = np.random.default_rng(7), np.random.default_rng(7)
    assert [sample_config(space, rng_a) for _ in range(20)] == [sample_config(space, rng_b) for _ in range(20)]


def test_draws_lie_in_the_space():
    space = SearchSpace()
    rng = np.random.default_rng(1)
    assert all(space.contains(sample_config(space, rng)) for _ in range(500))


def test_ratio_frequencies_are_uniform():
    space = SearchSpace()
    rng = np.random.default_rng(2)
    n = 10_000
    draws = np.array([sample_config(space, rng).ratios for _ in range(n)])
    p = 1 / 8
    sigma = np.sqrt(p * (1 - p) / n)
    for slot in range(space.n_slots):
        for choice in space.ratio_choices:
            assert abs(np.mean(draws[:, slot] == choice) - p) < 3 * sigma + 1e-3


def test_membership_and_validation():
    space = SearchSpace()
    good = Config(ratios=(0.1, 0.2, 0.3, 0.4, 0.5), alpha=2.5)
    assert space.validate_config(good) is good
    for bad in (
        Config(ratios=(0.1, 0.2, 0.3, 0.4), alpha=2.5),
        Config(ratios=(0.1, 0.2, 0.3, 0.4, 0.55), alpha=2.5),
        Config(ratios=(0.1, 0.2, 0.3, 0.4, 0.5), alpha=5.0),
    ):
        assert not space.contains(bad)
        with pytest.raises(ConfigurationError):
            space.validate_config(bad)


def test_enumerate_covers_a_small_space():
    space = SearchSpace(ratio_choices=(0.1, 0.5), alpha_choices=(1.0, 2.0), n_slots=3)
    configs = list(space.enumerate())
    assert len(configs) == space.size == 16
    assert len({c.key() for c in configs}) == 16


def test_ablated_models_fix_their_dimensions():
    search = SearchConfig()
    dense = SearchSpace.from_settings(search, ModelConfig(use_sparse=False))
    assert dense.ratio_choices == (0.0,)
    no_mag = SearchSpace.from_settings(search, ModelConfig(use_magnifier=False))
    assert no_mag.alpha_choices == (1.0,)


def test_ratio_choices_must_be_below_one():
    with pytest.raises(ValueError):
        SearchSpace(ratio_choices=(0.5, 1.0))


def test_nan_fitness_rejected():
    with pytest.raises(ValueError):
        FitnessRecord(config=Config(ratios=(0.1,), alpha=1.0), fitness=float("nan"), seed=0)
