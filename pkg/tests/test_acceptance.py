"""Прогоны на настоящих корпусах. Пути берутся из IMDB_ROOT и ALEXA_TSV."""
from __future__ import annotations

import os

import pytest

from app.config import RunConfig
from app.grid import run_grid

IMDB_ROOT = os.getenv("IMDB_ROOT")
ALEXA_TSV = os.getenv("ALEXA_TSV")

pytestmark = pytest.mark.slow


@pytest.mark.skipif(not IMDB_ROOT, reason="IMDB_ROOT is not set")
def test_imdb_tfidf_logistic_regression(tmp_path):
    cfg = RunConfig(
        imdb_path=IMDB_ROOT,
        datasets=["imdb"],
        features=["tfidf"],
        classifiers=["logistic_regression"],
        imdb_subsample=5000,
        out_dir=str(tmp_path),
    )
    cell = run_grid(cfg).cells[0]
    assert cell.ok, cell.error
    assert cell.accuracy >= 82.0


@pytest.mark.skipif(not ALEXA_TSV, reason="ALEXA_TSV is not set")
def test_alexa_tfidf_random_forest(tmp_path):
    cfg = RunConfig(
        alexa_path=ALEXA_TSV,
        datasets=["alexa"],
        features=["tfidf"],
        classifiers=["random_forest"],
        out_dir=str(tmp_path),
    )
    cell = run_grid(cfg).cells[0]
    assert cell.ok, cell.error
    assert cell.accuracy >= 88.0
