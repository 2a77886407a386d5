from __future__ import annotations
import hashlib
import logging
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import scipy
from joblib import Parallel, delayed

from app import classifiers
from app.classifiers.base import TrainSet
from app.config import RunConfig
from app.errors import CorpusLoadError, ReportError
from app.features import FeatureSpace, dump_vocabulary
from app.logging_setup import kv
from app.metrics import evaluate
from app.models.documents import Corpus, TokenStream
from app.models.reports import (
    CLASSIFIER_ORDER,
    DATASET_ORDER,
    FEATURE_ORDER,
    METRIC_NAMES,
    CellTiming,
    EvalReport,
    FeatureComparison,
    GridResult,
    MetricDelta,
    MetricMaximum,
)
from app.preprocess import PipelineConfig, preprocess_corpus
from app.services.corpus_io import load_alexa, load_imdb, split_corpus, subsample_corpus

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedDataset:
    """Предобработанный корпус, общий для всех ячеек датасета (не меняется)."""

    name: str
    class_names: tuple[str, ...]
    train: list[TokenStream]
    test: list[TokenStream]
    y_train: np.ndarray
    y_test: np.ndarray


def cell_seed(seed: int, dataset: str, feature: str, classifier: str) -> int:
    """Сид ячейки зависит только от координат ячейки."""
    digest = hashlib.sha256(f"{seed}:{dataset}:{feature}:{classifier}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def environment_note() -> str:
    return (
        f"python {platform.python_version()} | numpy {np.__version__} | scipy {scipy.__version__} "
        f"| {platform.platform()}"
    )


# ================================
#     ДАННЫЕ
# ================================

def pipeline_config(config: RunConfig) -> PipelineConfig:
    return PipelineConfig.from_files(
        stopwords_path=config.stopwords_path,
        abbreviations_path=config.abbreviations_path,
        lemmas_path=config.lemmas_path,
        use_stopwords=config.remove_stopwords,
        lowercase=config.lowercase,
        strip_punctuation=config.strip_punctuation,
        expand_abbreviations=config.expand_abbreviations,
        numbers_to_words=config.numbers_to_words,
        reducer=config.reducer,
    )


def load_dataset(name: str, config: RunConfig) -> Corpus:
    """Загрузка + разбиение. IMDB по умолчанию использует штатное train/test."""
    if name == "imdb":
        if not config.imdb_path:
            raise CorpusLoadError("imdb_path is not set", missing=["imdb_path"])
        corpus = load_imdb(config.imdb_path)
        if config.imdb_resplit:
            corpus = split_corpus(corpus, config.test_fraction, config.seed)
        if config.imdb_subsample:
            corpus = subsample_corpus(corpus, config.imdb_subsample, config.seed)
        return corpus
    if name == "alexa":
        if not config.alexa_path:
            raise CorpusLoadError("alexa_path is not set", missing=["alexa_path"])
        corpus = load_alexa(config.alexa_path, config.alexa_text_column, config.alexa_label_column)
        return split_corpus(corpus, config.test_fraction, config.seed)
    raise CorpusLoadError(f"unknown dataset {name!r}", missing=[name])


def prepare_dataset(corpus: Corpus, pipeline: PipelineConfig, n_jobs: int = 1) -> PreparedDataset:
    streams = preprocess_corpus(corpus, pipeline, n_jobs=n_jobs)
    labels = np.asarray(corpus.label_ids(), dtype=np.int64)
    is_test = np.array([d.split == "test" for d in corpus.documents], dtype=bool)
    return PreparedDataset(
        name=corpus.name,
        class_names=tuple(corpus.class_names),
        train=[s for s, t in zip(streams, is_test) if not t],
        test=[s for s, t in zip(streams, is_test) if t],
        y_train=labels[~is_test],
        y_test=labels[is_test],
    )


# ================================
#     ЯЧЕЙКИ
# ================================

def classifier_hyperparameters(kind: str, config: RunConfig, seed: int, n_jobs: int = 1) -> dict[str, Any]:
    if kind == "multinomial_nb":
        return {"alpha": config.nb_alpha}
    if kind == "linear_svm":
        return {"c": config.svm_c, "epochs": config.svm_epochs, "seed": seed}
    if kind == "logistic_regression":
        return {"l2": config.lr_l2, "epochs": config.lr_epochs, "tol": config.lr_tol, "seed": seed}
    if kind == "knn":
        return {"k": config.knn_k, "metric": config.knn_metric}
    if kind == "decision_tree":
        return {"max_depth": config.tree_max_depth, "min_leaf": config.tree_min_leaf, "seed": seed}
    if kind == "random_forest":
        return {
            "n_trees": config.forest_n_trees,
            "max_depth": config.forest_max_depth,
            "feature_subsample": config.forest_feature_subsample,
            "seed": seed,
            "bootstrap": config.forest_bootstrap,
            "min_leaf": config.tree_min_leaf,
            "n_jobs": n_jobs,
        }
    raise ValueError(f"unknown classifier kind {kind!r}")


def _failed(dataset: str, feature: str, kind: str, config: RunConfig, exc: BaseException) -> EvalReport:
    return EvalReport(
        dataset=dataset,
        feature_scheme=feature,
        classifier=kind,
        status="failed",
        error=f"{type(exc).__name__}: {exc}",
        config_snapshot=config.for_cell(dataset, feature, kind),
    )


def run_cell(
    data: PreparedDataset,
    feature: str,
    kind: str,
    train_set: TrainSet,
    test_matrix,
    config: RunConfig,
    notes: dict[str, Any],
    n_jobs: int = 1,
) -> tuple[EvalReport, float]:
    """Одна ячейка: обучение, предсказание, метрики. Исключение превращается в упавшую ячейку."""
    started = time.perf_counter()
    seed = cell_seed(config.seed, data.name, feature, kind)
    try:
        model = classifiers.train(kind, train_set, **classifier_hyperparameters(kind, config, seed, n_jobs))
        predicted = classifiers.predict(model, test_matrix)
        report = evaluate(
            data.y_test,
            predicted,
            dataset=data.name,
            feature_scheme=feature,
            classifier=kind,
            class_names=data.class_names,
            config_snapshot=config.for_cell(data.name, feature, kind),
            notes={**notes, "cell_seed": seed, "diagnostics": dict(model.diagnostics)},
        )
    except Exception as e:
        logger.exception("Cell failed: %s/%s/%s", data.name, feature, kind)
        report = _failed(data.name, feature, kind, config, e)
    elapsed = time.perf_counter() - started
    logger.info(kv("CELL", dataset=data.name, feature=feature, classifier=kind, status=report.status,
                   A=report.accuracy, seconds=f"{elapsed:.3f}"))
    return report, elapsed


def _run_scheme(data: PreparedDataset, feature: str, config: RunConfig) -> list[tuple[EvalReport, float]]:
    kinds = [k for k in CLASSIFIER_ORDER if k in config.classifiers]
    started = time.perf_counter()
    try:
        n = config.ngram_n if feature == "ngram" else config.tfidf_n
        space = FeatureSpace.fit(
            data.train, feature, n=n, min_df=config.min_df, max_features=config.max_features,
            idf_variant=config.idf_variant,
        )
        X_train = space.transform(data.train)
        X_test = space.transform(data.test)
        train_set = TrainSet(X_train, data.y_train, data.class_names)
    except Exception as e:
        # без признаков не посчитать ни одну ячейку схемы
        logger.exception("Feature extraction failed: %s/%s", data.name, feature)
        elapsed = time.perf_counter() - started
        return [(_failed(data.name, feature, k, config, e), elapsed) for k in kinds]

    if config.dump_vocabulary:
        target = Path(config.out_dir) / "vocab" / f"{data.name}_{feature}.tsv"
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            dump_vocabulary(space.vocab, target, idf=space.idf, variant=config.idf_variant)
        except OSError as e:
            raise ReportError(f"Cannot write vocabulary dump {target}: {e}") from e

    notes = {
        "vocabulary_size": space.dim,
        "empty_train_docs": int(np.sum(np.diff(X_train.indptr) == 0)),
        "empty_test_docs": int(np.sum(np.diff(X_test.indptr) == 0)),
        "train_docs": X_train.shape[0],
        "test_docs": X_test.shape[0],
    }

    if config.n_jobs == 1 or len(kinds) == 1:
        return [run_cell(data, feature, k, train_set, X_test, config, notes, n_jobs=config.n_jobs) for k in kinds]
    return Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(run_cell)(data, feature, k, train_set, X_test, config, notes) for k in kinds
    )


def run_grid(config: RunConfig) -> GridResult:
    """
    Вся сетка датасеты x схемы x классификаторы.
    Загрузка и предобработка идут до первой ячейки, ошибки данных поднимаются наружу.
    """
    datasets = [d for d in DATASET_ORDER if d in config.datasets]
    features = [f for f in FEATURE_ORDER if f in config.features]
    pipeline = pipeline_config(config)

    prepared = [prepare_dataset(load_dataset(name, config), pipeline, config.n_jobs) for name in datasets]

    cells: list[EvalReport] = []
    timings: list[CellTiming] = []
    for data in prepared:
        logger.info(kv("DATASET", name=data.name, train=len(data.train), test=len(data.test)))
        for feature in features:
            for report, elapsed in _run_scheme(data, feature, config):
                cells.append(report)
                timings.append(CellTiming(dataset=report.dataset, feature_scheme=report.feature_scheme,
                                          classifier=report.classifier, wall_clock_s=elapsed))

    result = GridResult(
        cells=cells,
        config=config.model_dump(mode="json"),
        timings=timings,
        environment=environment_note(),
    )
    logger.info(kv("GRID", cells=len(cells), failed=len(result.failed)))
    return result


# ================================
#     СРАВНЕНИЕ СХЕМ
# ================================

def compare_features(result: GridResult) -> FeatureComparison:
    deltas: list[MetricDelta] = []
    for dataset in result.datasets():
        for kind in CLASSIFIER_ORDER:
            ng = result.cell(dataset, "ngram", kind)
            tf = result.cell(dataset, "tfidf", kind)
            if ng is None or tf is None or not (ng.ok and tf.ok):
                continue
            deltas.append(MetricDelta(
                dataset=dataset,
                classifier=kind,
                deltas={m: tf.metric(m) - ng.metric(m) for m in METRIC_NAMES},
            ))

    maxima: list[MetricMaximum] = []
    ok_cells = sorted(
        (c for c in result.cells if c.ok),
        key=lambda c: (_order(DATASET_ORDER, c.dataset), _order(FEATURE_ORDER, c.feature_scheme),
                       _order(CLASSIFIER_ORDER, c.classifier)),
    )
    for m in METRIC_NAMES:
        best: Optional[EvalReport] = None
        for c in ok_cells:
            # строго больше: при равенстве остаётся первая ячейка в порядке таблиц
            if best is None or c.metric(m) > best.metric(m):
                best = c
        if best is not None:
            maxima.append(MetricMaximum(metric=m, value=best.metric(m), feature_scheme=best.feature_scheme,
                                        classifier=best.classifier, dataset=best.dataset))

    if not deltas:
        return FeatureComparison(
            available=False,
            note="comparison unavailable: need both ngram and tfidf results for at least one "
                 "(dataset, classifier) pair",
            maxima=maxima,
        )
    return FeatureComparison(available=True, deltas=deltas, maxima=maxima)


def _order(order: tuple[str, ...], value: str) -> int:
    return order.index(value) if value in order else len(order)
