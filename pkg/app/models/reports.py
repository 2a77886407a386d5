# app/models/reports.py
from __future__ import annotations
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

FeatureScheme = Literal["ngram", "tfidf"]
ClassifierKind = Literal[
    "multinomial_nb",
    "linear_svm",
    "knn",
    "logistic_regression",
    "decision_tree",
    "random_forest",
]
Averaging = Literal["weighted", "macro", "per_class"]
CellStatus = Literal["ok", "failed"]

DATASET_ORDER: tuple[str, ...] = ("imdb", "alexa")
FEATURE_ORDER: tuple[str, ...] = ("ngram", "tfidf")
# Порядок строк как в сравнительных таблицах: NB, SVM, KNN, LR, DT, RF
CLASSIFIER_ORDER: tuple[str, ...] = (
    "multinomial_nb",
    "linear_svm",
    "knn",
    "logistic_regression",
    "decision_tree",
    "random_forest",
)
CLASSIFIER_TITLES: dict[str, str] = {
    "multinomial_nb": "Multinomial NB",
    "linear_svm": "SVM",
    "knn": "KNeighbors",
    "logistic_regression": "LogisticRegression",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
}
DATASET_TITLES: dict[str, str] = {"imdb": "IMDB", "alexa": "Alexa"}
METRIC_NAMES: tuple[str, ...] = ("A", "P", "R", "F1")


class ClassMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    precision: float
    recall: float
    f1: float
    support: int


class MetricBundle(BaseModel):
    """P/R/F1 в процентах; при averaging=per_class агрегатов нет."""

    model_config = ConfigDict(frozen=True)

    averaging: Averaging
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    per_class: List[ClassMetrics] = Field(default_factory=list)
    zero_division: List[str] = Field(default_factory=list)


class EvalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    dataset: str
    feature_scheme: FeatureScheme
    classifier: ClassifierKind
    status: CellStatus = "ok"
    error: Optional[str] = None

    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    per_class: List[ClassMetrics] = Field(default_factory=list)

    config_snapshot: Dict[str, Any] = Field(default_factory=dict)
    # Диагностика: пустые документы, zero-division, целевая функция и т.п.
    notes: Dict[str, Any] = Field(default_factory=dict)

    @property
    def key(self) -> tuple[str, str, str]:
        return self.dataset, self.feature_scheme, self.classifier

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def metric(self, name: str) -> Optional[float]:
        return {"A": self.accuracy, "P": self.precision, "R": self.recall, "F1": self.f1}[name]

    def to_csv_row(self) -> list[str]:
        """dataset, feature, classifier, A, P, R, F1; значения уже округлены."""
        from app.formatters import fmt_pct

        return [
            self.dataset,
            self.feature_scheme,
            self.classifier,
            *(fmt_pct(self.metric(m)) for m in METRIC_NAMES),
        ]


class CellTiming(BaseModel):
    dataset: str
    feature_scheme: str
    classifier: str
    wall_clock_s: float


class GridResult(BaseModel):
    cells: List[EvalReport] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)
    # Время и окружение хранятся отдельно от метрик
    timings: List[CellTiming] = Field(default_factory=list)
    environment: str = ""

    @property
    def failed(self) -> list[EvalReport]:
        return [c for c in self.cells if not c.ok]

    def datasets(self) -> list[str]:
        present = {c.dataset for c in self.cells} or set(self.config.get("datasets") or [])
        return [d for d in DATASET_ORDER if d in present] + sorted(present - set(DATASET_ORDER))

    def schemes(self) -> list[str]:
        present = {c.feature_scheme for c in self.cells}
        return [f for f in FEATURE_ORDER if f in present]

    def cell(self, dataset: str, feature: str, classifier: str) -> Optional[EvalReport]:
        for c in self.cells:
            if c.key == (dataset, feature, classifier):
                return c
        return None


class MetricDelta(BaseModel):
    dataset: str
    classifier: str
    deltas: Dict[str, float]


class MetricMaximum(BaseModel):
    metric: str
    value: float
    feature_scheme: str
    classifier: str
    dataset: str


class FeatureComparison(BaseModel):
    available: bool
    note: Optional[str] = None
    deltas: List[MetricDelta] = Field(default_factory=list)
    maxima: List[MetricMaximum] = Field(default_factory=list)


GridResultAdapter = TypeAdapter(GridResult)
