from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from app.errors import ContractError, UndefinedMetricError
from app.models.documents import CLASS_NAMES
from app.models.reports import Averaging, ClassMetrics, EvalReport, MetricBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConfusionCounts:
    """matrix[t, p]: сколько документов класса t предсказано как p."""

    matrix: np.ndarray
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError(f"confusion matrix must be square, got shape {m.shape}")
        if (m < 0).any():
            raise ContractError("confusion counts must be >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if len(self.class_names) != m.shape[0]:
            object.__setattr__(self, "class_names", tuple(str(i) for i in range(m.shape[0])))

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    @property
    def fp(self) -> np.ndarray:
        return self.matrix.sum(axis=0) - self.tp

    @property
    def fn(self) -> np.ndarray:
        return self.matrix.sum(axis=1) - self.tp

    @property
    def support(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def confusion(
    true_labels: Sequence[int] | np.ndarray,
    predicted: Sequence[int] | np.ndarray,
    num_classes: int,
    class_names: Optional[Sequence[str]] = None,
) -> ConfusionCounts:
    t = np.asarray(true_labels, dtype=np.int64).ravel()
    p = np.asarray(predicted, dtype=np.int64).ravel()
    if t.size != p.size:
        raise ContractError(f"length mismatch: {t.size} true labels vs {p.size} predictions")
    for name, arr in (("true", t), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise ContractError(f"{name} labels must lie in [0, {num_classes})")
    flat = np.bincount(t * num_classes + p, minlength=num_classes * num_classes)
    names = tuple(class_names) if class_names is not None else (
        CLASS_NAMES if num_classes == len(CLASS_NAMES) else tuple(str(i) for i in range(num_classes))
    )
    return ConfusionCounts(flat.reshape(num_classes, num_classes), names)


def accuracy(counts: ConfusionCounts) -> float:
    """Процент верных предсказаний."""
    if counts.total == 0:
        raise UndefinedMetricError("accuracy is undefined for zero evaluated documents")
    return 100.0 * float(np.trace(counts.matrix)) / counts.total


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """num / den, где den == 0 даёт 0; второй элемент: маска таких классов."""
    zero = den == 0
    out = np.divide(num, den, out=np.zeros(num.shape, dtype=np.float64), where=~zero)
    return out, zero


def precision_recall_f1(counts: ConfusionCounts, averaging: Averaging = "weighted") -> MetricBundle:
    if counts.total == 0:
        raise UndefinedMetricError("precision/recall/F1 are undefined for zero evaluated documents")
    if averaging not in ("weighted", "macro", "per_class"):
        raise ValueError(f"unknown averaging {averaging!r}")

    tp = counts.tp.astype(np.float64)
    precision, p_zero = _safe_ratio(tp, tp + counts.fp)
    recall, r_zero = _safe_ratio(tp, tp + counts.fn)
    f1, _ = _safe_ratio(2.0 * precision * recall, precision + recall)

    flags = [f"precision:{counts.class_names[c]}" for c in np.flatnonzero(p_zero)]
    flags += [f"recall:{counts.class_names[c]}" for c in np.flatnonzero(r_zero)]

    support = counts.support
    per_class = [
        ClassMetrics(
            label=counts.class_names[c],
            precision=100.0 * precision[c],
            recall=100.0 * recall[c],
            f1=100.0 * f1[c],
            support=int(support[c]),
        )
        for c in range(counts.num_classes)
    ]

    if averaging == "per_class":
        return MetricBundle(averaging=averaging, per_class=per_class, zero_division=flags)

    if averaging == "weighted":
        # support * recall == tp: взвешенная полнота равна accuracy
        total = counts.total
        avg_precision = 100.0 * float((support * precision).sum()) / total
        avg_recall = 100.0 * float(counts.tp.sum()) / total
        avg_f1 = 100.0 * float((support * f1).sum()) / total
    else:
        avg_precision = 100.0 * float(precision.mean())
        avg_recall = 100.0 * float(recall.mean())
        avg_f1 = 100.0 * float(f1.mean())
    return MetricBundle(
        averaging=averaging,
        precision=avg_precision,
        recall=avg_recall,
        f1=avg_f1,
        per_class=per_class,
        zero_division=flags,
    )


def evaluate(
    true_labels: Sequence[int] | np.ndarray,
    predicted: Sequence[int] | np.ndarray,
    *,
    dataset: str,
    feature_scheme: str,
    classifier: str,
    class_names: Sequence[str] = CLASS_NAMES,
    config_snapshot: Optional[Mapping[str, Any]] = None,
    averaging: Averaging = "weighted",
    notes: Optional[Mapping[str, Any]] = None,
) -> EvalReport:
    """Ячейка сетки: confusion -> A/P/R/F1 (проценты, без округления)."""
    counts = confusion(true_labels, predicted, len(class_names), class_names)
    bundle = precision_recall_f1(counts, averaging)
    extra = dict(notes or {})
    if bundle.zero_division:
        extra["zero_division"] = bundle.zero_division
        logger.warning("zero division in %s/%s/%s: %s", dataset, feature_scheme, classifier, bundle.zero_division)
    extra["confusion"] = counts.matrix.tolist()

    return EvalReport(
        dataset=dataset,
        feature_scheme=feature_scheme,
        classifier=classifier,
        accuracy=accuracy(counts),
        precision=bundle.precision,
        recall=bundle.recall,
        f1=bundle.f1,
        per_class=bundle.per_class,
        config_snapshot=dict(config_snapshot or {}),
        notes=extra,
    )
