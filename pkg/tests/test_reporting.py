from __future__ import annotations

import json

import pytest

from app.errors import ReportError
from app.models.reports import EvalReport, GridResult
from app.reporting import emit_comparison, emit_reports, load_grid_result, save_grid_result


def _result() -> GridResult:
    cells = [
        EvalReport(dataset="imdb", feature_scheme=s, classifier="linear_svm",
                   accuracy=v, precision=v, recall=v, f1=v)
        for s, v in (("ngram", 84.5), ("tfidf", 87.125))
    ]
    return GridResult(cells=cells, config={"seed": 42, "features": ["ngram", "tfidf"]}, environment="test")


def test_default_files(tmp_path):
    written = emit_reports(_result(), ["csv", "markdown"], tmp_path)
    assert sorted(p.name for p in written) == [
        "cells.csv", "ngram_table.csv", "ngram_table.md", "plotdata.csv", "run_config.json",
        "tfidf_table.csv", "tfidf_table.md",
    ]
    csv_lines = (tmp_path / "tfidf_table.csv").read_text(encoding="utf-8").splitlines()
    assert csv_lines[0] == "Classifier,IMDB A,IMDB P,IMDB R,IMDB F1"
    assert csv_lines[1] == "SVM,87.12,87.12,87.12,87.12"
    assert json.loads((tmp_path / "run_config.json").read_text(encoding="utf-8")) == {
        "seed": 42, "features": ["ngram", "tfidf"],
    }


def test_cells_csv_has_one_row_per_cell(tmp_path):
    result = _result()
    result.cells.append(EvalReport(dataset="alexa", feature_scheme="tfidf", classifier="knn",
                                   status="failed", error="TrainingError: k too large"))
    emit_reports(result, ["csv"], tmp_path)
    assert (tmp_path / "cells.csv").read_text(encoding="utf-8").splitlines() == [
        "dataset,feature,classifier,A,P,R,F1",
        "imdb,ngram,linear_svm,84.50,84.50,84.50,84.50",
        "imdb,tfidf,linear_svm,87.12,87.12,87.12,87.12",
        "alexa,tfidf,knn,n/a,n/a,n/a,n/a",
    ]
    emit_reports(_result(), ["markdown"], tmp_path / "md")
    assert not (tmp_path / "md" / "cells.csv").exists()


def test_json_format_adds_cells_and_comparison(tmp_path):
    emit_reports(_result(), ["json"], tmp_path)
    cells = json.loads((tmp_path / "cells.json").read_text(encoding="utf-8"))
    assert [c["feature_scheme"] for c in cells] == ["ngram", "tfidf"]
    comparison = json.loads((tmp_path / "comparison.json").read_text(encoding="utf-8"))
    assert comparison["available"] is True
    assert comparison["deltas"][0]["deltas"]["A"] == pytest.approx(2.625)


def test_empty_result_writes_headers_only(tmp_path):
    emit_reports(GridResult(config={"features": ["tfidf"]}), ["csv"], tmp_path)
    assert (tmp_path / "tfidf_table.csv").read_text(encoding="utf-8") == (
        "Classifier,IMDB A,IMDB P,IMDB R,IMDB F1,Alexa A,Alexa P,Alexa R,Alexa F1\n"
    )
    assert (tmp_path / "plotdata.csv").read_text(encoding="utf-8") == "classifier,feature,dataset,metric,value\n"
    assert not (tmp_path / "ngram_table.csv").exists()


def test_unwritable_target_raises_before_writing(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("not a directory", encoding="utf-8")
    with pytest.raises(ReportError):
        emit_reports(_result(), ["csv"], blocker)
    with pytest.raises(ReportError):
        emit_reports(_result(), ["csv"], blocker / "nested")


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit_reports(_result(), ["xlsx"], tmp_path)


def test_grid_result_round_trip(tmp_path):
    path = save_grid_result(_result(), tmp_path / "grid_result.json")
    loaded = load_grid_result(path)
    assert loaded == _result()
    with pytest.raises(ReportError):
        load_grid_result(tmp_path / "missing.json")


def test_emit_comparison(tmp_path):
    path, text = emit_comparison(_result(), tmp_path / "cmp")
    assert path.name == "comparison.json"
    assert text.startswith("Feature comparison (tfidf - ngram)")
    assert "A +2.62" in text
