import numpy as np
import pytest

from src.evaluation import ConfusionMatrix, per_class_recall, uar, uf1
from src.numeric import ContractViolation

Y_TRUE = [0, 0, 1, 1, 2, 2]
Y_PRED = [0, 1, 1, 1, 2, 0]


def test_hand_expanded_examples():
    cm = ConfusionMatrix.from_predictions(Y_TRUE, Y_PRED, 3)
    assert cm.to_list() == [[1, 1, 0], [0, 2, 0], [1, 0, 1]]
    assert uf1(cm) == pytest.approx((0.5 + 0.8 + 2 / 3) / 3, abs=1e-9)
    assert uf1(cm) == pytest.approx(0.65556, abs=1e-5)
    assert uar(cm) == pytest.approx(2 / 3, abs=1e-9)


def test_single_class_predictions():
    cm = ConfusionMatrix.from_predictions(Y_TRUE, [0] * 6, 3)
    assert uf1(cm) == pytest.approx(1 / 6, abs=1e-9)
    assert uar(cm) == pytest.approx(1 / 3, abs=1e-9)


def test_perfect_predictions():
    cm = ConfusionMatrix.from_predictions(Y_TRUE, Y_TRUE, 3)
    assert uf1(cm) == 1.0 and uar(cm) == 1.0


def test_tp_fp_fn_support():
    cm = ConfusionMatrix.from_predictions(Y_TRUE, Y_PRED, 3)
    assert cm.tp.tolist() == [1, 2, 1]
    assert cm.fp.tolist() == [1, 1, 0]
    assert cm.fn.tolist() == [1, 0, 1]
    assert cm.support.tolist() == [2, 2, 2]


def test_absent_class():
    cm = ConfusionMatrix.from_predictions([0, 0, 1, 1], [0, 0, 1, 0], 3)
    with pytest.raises(ContractViolation):
        uar(cm)
    with pytest.raises(ContractViolation):
        uf1(cm, strict=True)
    assert uar(cm, strict=False) == pytest.approx(0.75)
    assert np.isnan(per_class_recall(cm)[2])


def test_empty_matrix():
    with pytest.raises(ContractViolation):
        uf1(ConfusionMatrix.zeros(3))
    with pytest.raises(ContractViolation):
        uar(ConfusionMatrix.zeros(3), strict=False)


def test_pooling_adds_counts():
    a = ConfusionMatrix.from_predictions(Y_TRUE[:3], Y_PRED[:3], 3)
    b = ConfusionMatrix.from_predictions(Y_TRUE[3:], Y_PRED[3:], 3)
    assert a + b == ConfusionMatrix.from_predictions(Y_TRUE, Y_PRED, 3)
    with pytest.raises(ContractViolation):
        a + ConfusionMatrix.zeros(5)


def test_random_predictions_recall_chance():
    rng = np.random.default_rng(0)
    for n_classes in (3, 5):
        y_true = np.repeat(np.arange(n_classes), 10_000 // n_classes)
        y_pred = rng.integers(0, n_classes, size=y_true.size)
        cm = ConfusionMatrix.from_predictions(y_true, y_pred, n_classes)
        assert abs(uar(cm) - 1 / n_classes) < 0.02


def test_invalid_matrices():
    with pytest.raises(ContractViolation):
        ConfusionMatrix(np.zeros((2, 3)))
    with pytest.raises(ContractViolation):
        ConfusionMatrix(-np.ones((2, 2)))
    with pytest.raises(ContractViolation):
        ConfusionMatrix.from_predictions([0, 1], [0], 2)


def test_frame_labels():
    frame = ConfusionMatrix.from_predictions(Y_TRUE, Y_PRED, 3).to_frame(["positive", "negative", "surprise"])
    assert list(frame.columns) == ["pred_positive", "pred_negative", "pred_surprise"]
    assert frame.loc["true_surprise", "pred_positive"] == 1
