from __future__ import annotations

import numpy as np
import pytest

from app.errors import ContractError, UndefinedMetricError
from app.formatters import fmt_pct
from app.metrics import accuracy, confusion, evaluate, precision_recall_f1


def test_confusion_counts():
    counts = confusion([0, 0, 0, 1], [0, 0, 1, 1], 2)
    assert counts.matrix.tolist() == [[2, 1], [0, 1]]
    assert counts.tp.tolist() == [2, 1]
    assert counts.fp.tolist() == [0, 1]
    assert counts.fn.tolist() == [1, 0]
    assert counts.support.tolist() == [3, 1]
    assert counts.class_names == ("negative", "positive")


@pytest.mark.parametrize(
    "true,pred,expected",
    [
        ([1] * 10, [1] * 9 + [0], 90.0),
        ([0, 1, 0, 1], [0, 1, 0, 1], 100.0),
        ([0, 1, 0, 1], [1, 0, 1, 0], 0.0),
    ],
)
def test_accuracy(true, pred, expected):
    assert accuracy(confusion(true, pred, 2)) == pytest.approx(expected)


def test_symmetric_errors_give_equal_metrics():
    true = [0] * 5 + [1] * 5
    pred = [0, 0, 0, 0, 1, 1, 1, 1, 1, 0]
    counts = confusion(true, pred, 2)
    bundle = precision_recall_f1(counts)
    assert accuracy(counts) == pytest.approx(80.0)
    assert bundle.precision == pytest.approx(80.0)
    assert bundle.recall == pytest.approx(80.0)
    assert bundle.f1 == pytest.approx(80.0)


def test_weighted_average_example():
    bundle = precision_recall_f1(confusion([0, 0, 0, 1], [0, 0, 1, 1], 2))
    assert bundle.precision == pytest.approx(87.5)
    assert bundle.recall == pytest.approx(75.0)
    assert bundle.f1 == pytest.approx(0.75 * 80.0 + 0.25 * 200.0 / 3.0)


@pytest.mark.parametrize("true", [[0, 1, 1, 0, 1], [1, 1, 1], [0] * 7])
def test_perfect_predictions_score_100(true):
    counts = confusion(true, true, 2)
    bundle = precision_recall_f1(counts)
    assert accuracy(counts) == 100.0
    assert (bundle.precision, bundle.recall, bundle.f1) == (100.0, 100.0, 100.0)


def test_weighted_recall_equals_accuracy_after_rounding():
    # 5 негативных (2 верно), 187 позитивных (148 верно)
    true = [0] * 5 + [1] * 187
    pred = [0] * 2 + [1] * 3 + [1] * 148 + [0] * 39
    counts = confusion(true, pred, 2)
    bundle = precision_recall_f1(counts)
    assert bundle.recall == accuracy(counts)
    assert fmt_pct(accuracy(counts)) == fmt_pct(bundle.recall) == "78.12"


def test_per_class_f1_is_harmonic_mean():
    bundle = precision_recall_f1(confusion([0, 1], [1, 1], 2), averaging="per_class")
    assert bundle.precision is None and bundle.f1 is None
    positive = bundle.per_class[1]
    assert (positive.precision, positive.recall) == (pytest.approx(50.0), pytest.approx(100.0))
    assert fmt_pct(positive.f1) == "66.67"


def test_macro_average():
    bundle = precision_recall_f1(confusion([0, 0, 0, 1], [0, 0, 1, 1], 2), averaging="macro")
    assert bundle.precision == pytest.approx(75.0)
    assert bundle.recall == pytest.approx(100.0 * (2 / 3 + 1) / 2)


def test_zero_division_is_flagged():
    bundle = precision_recall_f1(confusion([0, 0, 1], [0, 0, 0], 2))
    assert bundle.per_class[1].precision == 0.0
    assert bundle.per_class[1].f1 == 0.0
    assert "precision:positive" in bundle.zero_division


def test_empty_evaluation_is_undefined():
    counts = confusion([], [], 2)
    with pytest.raises(UndefinedMetricError):
        accuracy(counts)
    with pytest.raises(UndefinedMetricError):
        precision_recall_f1(counts)


def test_label_contract():
    with pytest.raises(ContractError):
        confusion([0, 1], [0], 2)
    with pytest.raises(ContractError):
        confusion([0, 2], [0, 1], 2)


def _tally(true: np.ndarray, pred: np.ndarray) -> tuple[float, float, float]:
    """Подсчёт вручную, без матрицы ошибок."""
    n = len(true)
    p = r = f = 0.0
    for c in (0, 1):
        tp = sum(1 for t, q in zip(true, pred) if t == c and q == c)
        fp = sum(1 for t, q in zip(true, pred) if t != c and q == c)
        fn = sum(1 for t, q in zip(true, pred) if t == c and q != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        w = (tp + fn) / n
        p, r, f = p + w * prec, r + w * rec, f + w * f1
    return 100 * p, 100 * r, 100 * f


def test_random_vectors_against_tally():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        true = rng.integers(0, 2, n)
        pred = np.where(rng.random(n) < 0.7, true, 1 - true)
        counts = confusion(true, pred, 2)
        bundle = precision_recall_f1(counts)

        assert bundle.recall == accuracy(counts)
        for cls in bundle.per_class:
            lo, hi = min(cls.precision, cls.recall), max(cls.precision, cls.recall)
            assert lo - 1e-9 <= cls.f1 <= hi + 1e-9
        expected = _tally(true, pred)
        assert (bundle.precision, bundle.recall, bundle.f1) == pytest.approx(expected, abs=1e-9)


def test_metrics_ignore_document_order():
    rng = np.random.default_rng(3)
    true = rng.integers(0, 2, 200)
    pred = rng.integers(0, 2, 200)
    perm = rng.permutation(200)
    a = precision_recall_f1(confusion(true, pred, 2))
    b = precision_recall_f1(confusion(true[perm], pred[perm], 2))
    assert (a.precision, a.recall, a.f1) == pytest.approx((b.precision, b.recall, b.f1))


def test_evaluate_builds_report():
    report = evaluate(
        [0, 0, 0, 1],
        [0, 0, 1, 1],
        dataset="imdb",
        feature_scheme="tfidf",
        classifier="linear_svm",
        config_snapshot={"seed": 42},
        notes={"cell_seed": 7},
    )
    assert report.ok
    assert report.accuracy == pytest.approx(75.0)
    assert report.precision == pytest.approx(87.5)
    assert report.notes["confusion"] == [[2, 1], [0, 1]]
    assert report.notes["cell_seed"] == 7
    assert report.config_snapshot == {"seed": 42}
    assert report.to_csv_row() == ["imdb", "tfidf", "linear_svm", "75.00", "87.50", "75.00", "76.67"]
