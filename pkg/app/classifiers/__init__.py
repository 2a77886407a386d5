from __future__ import annotations
from typing import Any, Callable

import numpy as np
import scipy.sparse as sp

from app.classifiers.base import Model, TrainSet, as_query
from app.classifiers.knn import predict_knn, train_knn
from app.classifiers.linear import (
    predict_linear_svm,
    predict_logistic_regression,
    train_linear_svm,
    train_logistic_regression,
)
from app.classifiers.naive_bayes import predict_multinomial_nb, train_multinomial_nb
from app.classifiers.tree import predict_tree, train_decision_tree, train_random_forest
from app.errors import TrainingError

TRAINERS: dict[str, Callable[..., Model]] = {
    "multinomial_nb": train_multinomial_nb,
    "linear_svm": train_linear_svm,
    "knn": train_knn,
    "logistic_regression": train_logistic_regression,
    "decision_tree": train_decision_tree,
    "random_forest": train_random_forest,
}

PREDICTORS: dict[str, Callable[[Model, sp.csr_matrix], np.ndarray]] = {
    "multinomial_nb": predict_multinomial_nb,
    "linear_svm": predict_linear_svm,
    "knn": predict_knn,
    "logistic_regression": predict_logistic_regression,
    "decision_tree": predict_tree,
    "random_forest": predict_tree,
}


def train(kind: str, data: TrainSet, **hyperparameters: Any) -> Model:
    try:
        trainer = TRAINERS[kind]
    except KeyError:
        raise TrainingError(f"Unknown classifier kind {kind!r}; expected one of {sorted(TRAINERS)}") from None
    return trainer(data, **hyperparameters)


def predict(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    """Один id класса на строку. Размерность проверяется до вызова модели."""
    X = as_query(model, matrix)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return np.asarray(PREDICTORS[model.kind](model, X), dtype=np.int64)


__all__ = ["Model", "TrainSet", "TRAINERS", "PREDICTORS", "train", "predict"]
