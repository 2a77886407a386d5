# app/formatters.py
from __future__ import annotations
from decimal import ROUND_HALF_EVEN, Decimal
from typing import List, Optional, Sequence

from app.models.reports import (
    CLASSIFIER_ORDER,
    CLASSIFIER_TITLES,
    DATASET_ORDER,
    DATASET_TITLES,
    FEATURE_ORDER,
    METRIC_NAMES,
    FeatureComparison,
    GridResult,
)

_CENT = Decimal("0.01")
MISSING = "n/a"


def fmt_pct(value: Optional[float]) -> str:
    """Проценты с двумя знаками, банковское округление (87.125 -> 87.12)."""
    if value is None:
        return MISSING
    return str(Decimal(repr(float(value))).quantize(_CENT, rounding=ROUND_HALF_EVEN))


def fmt_delta(value: Optional[float]) -> str:
    if value is None:
        return MISSING
    d = Decimal(repr(float(value))).quantize(_CENT, rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)  # без "-0.00"
    return f"+{d}" if d >= 0 else str(d)


# ================================
#     ТАБЛИЦЫ ПО СХЕМЕ ПРИЗНАКОВ
# ================================

def _table_datasets(result: GridResult) -> list[str]:
    return result.datasets() or list(DATASET_ORDER)


def _table_classifiers(result: GridResult, scheme: str) -> list[str]:
    present = {c.classifier for c in result.cells if c.feature_scheme == scheme}
    return [k for k in CLASSIFIER_ORDER if k in present]


def table_header(result: GridResult) -> list[str]:
    header = ["Classifier"]
    for d in _table_datasets(result):
        title = DATASET_TITLES.get(d, d)
        header += [f"{title} {m}" for m in METRIC_NAMES]
    return header


def table_rows(result: GridResult, scheme: str) -> list[list[str]]:
    """Строки = классификаторы в фиксированном порядке, колонки = A/P/R/F1 по датасетам."""
    datasets = _table_datasets(result)
    rows: list[list[str]] = []
    for kind in _table_classifiers(result, scheme):
        row = [CLASSIFIER_TITLES.get(kind, kind)]
        for d in datasets:
            cell = result.cell(d, scheme, kind)
            row += [fmt_pct(cell.metric(m) if cell else None) for m in METRIC_NAMES]
        rows.append(row)
    return rows


def format_markdown_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(["---"] + ["---:"] * (len(header) - 1)) + "|",
    ]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


PLOTDATA_HEADER = ["classifier", "feature", "dataset", "metric", "value"]
CELLS_HEADER = ["dataset", "feature", "classifier", "A", "P", "R", "F1"]


def plotdata_rows(result: GridResult) -> list[list[str]]:
    """Длинный формат для графиков; упавшие ячейки пропускаются."""
    datasets = _table_datasets(result)
    rows: list[list[str]] = []
    for d in datasets:
        for f in FEATURE_ORDER:
            for kind in CLASSIFIER_ORDER:
                cell = result.cell(d, f, kind)
                if cell is None or not cell.ok:
                    continue
                rows += [[kind, f, d, m, fmt_pct(cell.metric(m))] for m in METRIC_NAMES]
    return rows


# ================================
#     СРАВНЕНИЕ TF-IDF vs N-GRAM
# ================================

def format_comparison(comparison: FeatureComparison) -> str:
    if not comparison.available:
        return f"Feature comparison unavailable: {comparison.note or 'no overlapping cells'}"

    lines: List[str] = ["Feature comparison (tfidf - ngram)", ""]
    for d in comparison.deltas:
        title = CLASSIFIER_TITLES.get(d.classifier, d.classifier)
        parts = " | ".join(f"{m} {fmt_delta(d.deltas.get(m))}" for m in METRIC_NAMES)
        lines.append(f"— {DATASET_TITLES.get(d.dataset, d.dataset)} / {title}: {parts}")

    if comparison.maxima:
        lines += ["", "Maxima:"]
        for mx in comparison.maxima:
            lines.append(
                f"— {mx.metric}: {fmt_pct(mx.value)} ({mx.feature_scheme}, {mx.classifier}, {mx.dataset})"
            )
    if comparison.note:
        lines += ["", comparison.note]
    return "\n".join(lines)


def format_run_summary(result: GridResult) -> str:
    ok = sum(1 for c in result.cells if c.ok)
    lines = [f"Cells: {len(result.cells)} | ok: {ok} | failed: {len(result.failed)}"]
    for c in result.failed:
        lines.append(f"FAILED {c.dataset}/{c.feature_scheme}/{c.classifier}: {c.error}")
    for scheme in result.schemes():
        lines += ["", f"{scheme}:", format_markdown_table(table_header(result), table_rows(result, scheme))]
    return "\n".join(lines)
