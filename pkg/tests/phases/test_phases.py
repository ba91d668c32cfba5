import numpy as np

from src.config import GAParams, TrainSchedule
from src.phases import (
    AdaptiveTrainingPhase,
    ConfigSearchPhase,
    FineTunePhase,
    PhaseStatus,
    PredictionPhase,
)
from src.search import Config, SearchSpace, Trainer

SPACE = SearchSpace(n_slots=4)


def _trainer(model, adaptive=1, finetune=1):
    schedule = TrainSchedule(adaptive_epochs=adaptive, finetune_epochs=finetune, batch_size=6)
    return Trainer(model, schedule, SPACE, steps_per_epoch=3, rng=np.random.default_rng(0))


def test_missing_context_fails_with_the_key_name():
    result = PredictionPhase().run({"model": object()})
    assert result.status == PhaseStatus.FAILED
    assert "test_data" in result.error and "best_config" in result.error
    assert result.metadata["exception_type"] == "ValueError"


def test_adaptive_phase_skips_zero_epochs(model_factory, tiny_dataset):
    result = AdaptiveTrainingPhase().run({"trainer": _trainer(model_factory(), adaptive=0), "fit_data": tiny_dataset})
    assert result.status == PhaseStatus.SKIPPED


def test_adaptive_phase_reports_losses(model_factory, tiny_dataset):
    result = AdaptiveTrainingPhase().run({"trainer": _trainer(model_factory()), "fit_data": tiny_dataset})
    assert result.is_success()
    assert result.data["epochs"] == 1
    assert np.isfinite(result.data["final_loss"])


def test_search_phase_returns_a_member_of_the_space(model_factory, tiny_dataset):
    context = {
        "model": model_factory(),
        "space": SPACE,
        "val_data": tiny_dataset,
        "ga": GAParams(population=3, generations=1, elite=1, tournament=2),
        "seed": 5,
    }
    result = ConfigSearchPhase().run(context)
    assert result.is_success()
    assert SPACE.contains(result.data["best_config"])
    assert result.data["best_fitness"] == min(r["fitness"] for r in result.data["search_log"])
    assert len(result.data["generation_best"]) == 2


def test_search_phase_does_not_touch_weights(model_factory, tiny_dataset):
    model = model_factory()
    before = model.state_dict()
    ConfigSearchPhase().run({
        "model": model, "space": SPACE, "val_data": tiny_dataset,
        "ga": GAParams(population=2, generations=0, elite=1, tournament=1),
    })
    after = model.state_dict()
    assert all(np.array_equal(before[k], after[k]) for k in before)


def test_finetune_phase_reports_validation_loss(model_factory, tiny_dataset):
    trainer = _trainer(model_factory())
    result = FineTunePhase().run({
        "trainer": trainer,
        "fit_data": tiny_dataset,
        "val_data": tiny_dataset,
        "best_config": Config(ratios=(0.3,) * 4, alpha=1.5),
    })
    assert result.is_success()
    assert result.data["val_loss"] > 0


def test_prediction_phase(model_factory, tiny_dataset):
    result = PredictionPhase().run({
        "model": model_factory(),
        "test_data": tiny_dataset,
        "best_config": Config(ratios=(0.3,) * 4, alpha=1.5),
    })
    assert result.data["predictions"].shape == (len(tiny_dataset),)
