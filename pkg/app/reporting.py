from __future__ import annotations
import json
import logging
import os
from pathlib import Path
from typing import Iterable

import pandas as pd

from app.errors import ReportError
from app.formatters import (
    CELLS_HEADER,
    PLOTDATA_HEADER,
    format_comparison,
    format_markdown_table,
    plotdata_rows,
    table_header,
    table_rows,
)
from app.grid import compare_features
from app.models.reports import FEATURE_ORDER, GridResult, GridResultAdapter

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("csv", "json", "markdown")
GRID_RESULT_FILE = "grid_result.json"


def _ensure_writable(out_dir: Path) -> None:
    """Проверяем каталог до записи первого файла."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"Cannot create output directory {out_dir}: {e}") from e
    if not out_dir.is_dir() or not os.access(out_dir, os.W_OK | os.X_OK):
        raise ReportError(f"Output directory is not writable: {out_dir}")


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    frame = pd.DataFrame(rows, columns=header, dtype=str)
    frame.to_csv(path, index=False, lineterminator="\n")


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _json_dump(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _report_schemes(result: GridResult) -> list[str]:
    present = result.schemes()
    if present:
        return present
    configured = result.config.get("features") or []
    return [f for f in FEATURE_ORDER if f in configured] or list(FEATURE_ORDER)


def emit_reports(result: GridResult, formats: Iterable[str], out_dir: str | Path) -> list[Path]:
    """
    Таблицы по схемам признаков ({scheme}_table.csv|.md), plotdata.csv, run_config.json;
    формат csv добавляет cells.csv (по строке на ячейку, в порядке сетки),
    формат json добавляет cells.json и comparison.json. Время и окружение в эти файлы не попадают.
    """
    fmts = list(dict.fromkeys(formats))
    unknown = [f for f in fmts if f not in REPORT_FORMATS]
    if unknown:
        raise ValueError(f"unknown report format(s): {unknown}")
    out = Path(out_dir)
    _ensure_writable(out)

    written: list[Path] = []
    header = table_header(result)
    try:
        for scheme in _report_schemes(result):
            rows = table_rows(result, scheme)
            if "csv" in fmts:
                path = out / f"{scheme}_table.csv"
                _write_csv(path, header, rows)
                written.append(path)
            if "markdown" in fmts:
                path = out / f"{scheme}_table.md"
                _write_text(path, format_markdown_table(header, rows))
                written.append(path)

        path = out / "plotdata.csv"
        _write_csv(path, PLOTDATA_HEADER, plotdata_rows(result))
        written.append(path)

        if "csv" in fmts:
            path = out / "cells.csv"
            _write_csv(path, CELLS_HEADER, [c.to_csv_row() for c in result.cells])
            written.append(path)

        path = out / "run_config.json"
        _write_text(path, _json_dump(result.config))
        written.append(path)

        if "json" in fmts:
            path = out / "cells.json"
            _write_text(path, _json_dump([c.model_dump(mode="json") for c in result.cells]))
            written.append(path)

            path = out / "comparison.json"
            _write_text(path, _json_dump(compare_features(result).model_dump(mode="json")))
            written.append(path)
    except OSError as e:
        raise ReportError(f"Failed writing reports to {out}: {e}") from e

    logger.info("REPORTS written | dir=%s | files=%s", out, len(written))
    return written


def emit_comparison(result: GridResult, out_dir: str | Path) -> tuple[Path, str]:
    """comparison.json + текстовая сводка (возвращается для вывода в консоль)."""
    out = Path(out_dir)
    _ensure_writable(out)
    comparison = compare_features(result)
    path = out / "comparison.json"
    try:
        _write_text(path, _json_dump(comparison.model_dump(mode="json")))
    except OSError as e:
        raise ReportError(f"Failed writing {path}: {e}") from e
    return path, format_comparison(comparison)


# --- Сохранение / загрузка результата сетки ---

def save_grid_result(result: GridResult, path: str | Path) -> Path:
    p = Path(path)
    _ensure_writable(p.parent)
    try:
        p.write_bytes(GridResultAdapter.dump_json(result, indent=2))
    except OSError as e:
        raise ReportError(f"Cannot write {p}: {e}") from e
    return p


def load_grid_result(path: str | Path) -> GridResult:
    p = Path(path)
    if not p.is_file():
        raise ReportError(f"Grid result not found: {p}")
    return GridResultAdapter.validate_json(p.read_bytes())
