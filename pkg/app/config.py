from __future__ import annotations
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Literal, Mapping, Optional, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from app.errors import ConfigError
from app.models.documents import DatasetName
from app.models.reports import CLASSIFIER_ORDER, ClassifierKind, FeatureScheme

logger = logging.getLogger(__name__)

# === Загружаем .env строго из корня проекта ===
# Структура: <root>/.env и <root>/app/config.py
ROOT_DIR = Path(__file__).resolve().parents[1]  # .. от app/
ENV_PATH = ROOT_DIR / ".env"
# override=False: реальные переменные окружения важнее .env
load_dotenv(dotenv_path=ENV_PATH, override=False)

OUT_DIR_ENV = "BENCH_OUT_DIR"


def _as_bool(v: str | None, default: bool = False) -> bool:
    if v is None:
        return default
    return v.strip().lower() in {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Config:
    """Окружение процесса: логи и каталог отчётов. Параметры эксперимента в RunConfig."""

    log_level: str
    log_to_file: bool
    log_file_path: str
    out_dir: Optional[str]

    @staticmethod
    def load() -> "Config":
        log_level = (os.getenv("BENCH_LOG_LEVEL") or "INFO").strip().upper()
        log_to_file = _as_bool(os.getenv("BENCH_LOG_TO_FILE"), False)
        log_file_path = (os.getenv("BENCH_LOG_FILE") or "bench.log").strip()
        out_dir = (os.getenv(OUT_DIR_ENV) or "").strip() or None
        return Config(
            log_level=log_level,
            log_to_file=log_to_file,
            log_file_path=log_file_path,
            out_dir=out_dir,
        )


# ================================
#     ПАРАМЕТРЫ ЗАПУСКА СЕТКИ
# ================================

_NONE_STRINGS = {"", "none", "null"}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # Данные
    imdb_path: Optional[str] = None
    alexa_path: Optional[str] = None
    alexa_text_column: str = "verified_reviews"
    alexa_label_column: str = "feedback"

    # Сетка
    datasets: List[DatasetName] = ["imdb", "alexa"]
    features: List[FeatureScheme] = ["ngram", "tfidf"]
    classifiers: List[ClassifierKind] = list(CLASSIFIER_ORDER)

    # Разбиение
    test_fraction: float = 0.2
    imdb_resplit: bool = False
    imdb_subsample: Optional[int] = None

    # Предобработка
    lowercase: bool = True
    strip_punctuation: bool = True
    expand_abbreviations: bool = True
    numbers_to_words: bool = False
    remove_stopwords: bool = True
    reducer: Literal["none", "stem", "lemmatize"] = "stem"
    stopwords_path: Optional[str] = None
    abbreviations_path: Optional[str] = None
    lemmas_path: Optional[str] = None

    # Признаки
    ngram_n: int = 2
    tfidf_n: int = 1
    min_df: int = 2
    max_features: Optional[int] = 50_000
    idf_variant: Literal["log10", "ln", "raw"] = "log10"

    # Классификаторы
    nb_alpha: float = 1.0
    svm_c: float = 1.0
    svm_epochs: int = 20
    lr_l2: float = 1.0
    lr_epochs: int = 100
    lr_tol: float = 1e-6
    knn_k: int = 5
    knn_metric: Literal["cosine", "euclidean"] = "cosine"
    tree_max_depth: Optional[int] = None
    tree_min_leaf: int = 1
    forest_n_trees: int = 100
    forest_max_depth: Optional[int] = None
    forest_feature_subsample: Union[Literal["sqrt"], float] = "sqrt"
    forest_bootstrap: bool = True

    # Запуск
    seed: int = 42
    out_dir: str = "out"
    formats: List[Literal["csv", "json", "markdown"]] = ["csv", "markdown"]
    n_jobs: int = 1
    dump_vocabulary: bool = False

    @field_validator("datasets", "features", "classifiers", "formats", mode="before")
    @classmethod
    def _split_list(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [x.strip() for x in v.split(",") if x.strip()]
        return v

    @field_validator(
        "imdb_path", "alexa_path", "imdb_subsample", "stopwords_path", "abbreviations_path",
        "lemmas_path", "max_features", "tree_max_depth", "forest_max_depth",
        mode="before",
    )
    @classmethod
    def _none_string(cls, v: Any) -> Any:
        if isinstance(v, str) and v.strip().lower() in _NONE_STRINGS:
            return None
        return v

    @field_validator("test_fraction")
    @classmethod
    def _fraction(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")
        return v

    @field_validator("forest_feature_subsample")
    @classmethod
    def _subsample(cls, v: Union[str, float]) -> Union[str, float]:
        if isinstance(v, float) and not 0.0 < v <= 1.0:
            raise ValueError("forest_feature_subsample must be 'sqrt' or a ratio in (0, 1]")
        return v

    @field_validator("ngram_n", "tfidf_n", "knn_k", "tree_min_leaf", "forest_n_trees", "min_df")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("datasets", "features", "classifiers")
    @classmethod
    def _dedup(cls, v: list) -> list:
        return list(dict.fromkeys(v))

    def for_cell(self, dataset: str, feature: str, classifier: str) -> dict[str, Any]:
        """Снимок конфигурации, которого достаточно для повторного прогона одной ячейки."""
        snap = self.model_copy(
            update={"datasets": [dataset], "features": [feature], "classifiers": [classifier]}
        )
        return snap.model_dump(mode="json")


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_run_config(
    path: Optional[str | Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Config] = None,
) -> RunConfig:
    """
    Собирает RunConfig: значения по умолчанию < файл KEY=value < BENCH_OUT_DIR < флаги CLI.
    Неизвестный ключ даёт ConfigError.
    """
    raw: dict[str, Any] = {}
    fields = set(RunConfig.model_fields)

    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"Config file not found: {p}")
        for key, value in dotenv_values(p).items():
            name = _normalize_key(key)
            if name not in fields:
                raise ConfigError(f"Unknown config key {key!r} in {p}")
            raw[name] = "" if value is None else value

    env = env or Config.load()
    if env.out_dir:
        raw["out_dir"] = env.out_dir

    for key, value in (overrides or {}).items():
        name = _normalize_key(key)
        if name not in fields:
            raise ConfigError(f"Unknown config key {key!r}")
        raw[name] = value

    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid run config: {e}") from e

    logger.info(
        "CFG loaded from %s | datasets=%s | features=%s | classifiers=%s | seed=%s | out_dir=%s",
        path or "<defaults>", cfg.datasets, cfg.features, cfg.classifiers, cfg.seed, cfg.out_dir,
    )
    return cfg
