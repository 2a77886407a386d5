from __future__ import annotations
from typing import Literal

import numpy as np
import scipy.sparse as sp

from app.classifiers.base import Model, TrainSet, as_query, fingerprint, vote
from app.errors import TrainingError

Metric = Literal["cosine", "euclidean"]
CHUNK_ROWS = 256


def train_knn(data: TrainSet, k: int = 5, metric: Metric = "cosine") -> Model:
    # обучение = запоминаем матрицу
    if k < 1 or k > data.n_rows:
        raise TrainingError(f"k must be in [1, {data.n_rows}], got {k}")
    if metric not in ("cosine", "euclidean"):
        raise TrainingError(f"unknown metric {metric!r}")
    X = data.matrix
    return Model(
        kind="knn",
        parameters={
            "train_data": X.data,
            "train_indices": X.indices,
            "train_indptr": X.indptr,
            "train_shape": np.asarray(X.shape, dtype=np.int64),
            "train_labels": data.labels,
        },
        hyperparameters={"k": k, "metric": metric},
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
    )


def _train_matrix(model: Model) -> sp.csr_matrix:
    p = model.parameters
    return sp.csr_matrix((p["train_data"], p["train_indices"], p["train_indptr"]), shape=tuple(p["train_shape"]))


def _unit_rows(X: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.csr_matrix(sp.diags(inv) @ X)


def distances(model: Model, query: sp.csr_matrix) -> np.ndarray:
    """Плотная матрица расстояний (строки query x строки train)."""
    T = _train_matrix(model)
    if model.hyperparameters["metric"] == "cosine":
        # нулевой вектор: сходство 0 со всеми, расстояние 1
        sims = (_unit_rows(query) @ _unit_rows(T).T).toarray()
        return 1.0 - sims
    qn = np.asarray(query.multiply(query).sum(axis=1)).ravel()
    tn = np.asarray(T.multiply(T).sum(axis=1)).ravel()
    d2 = qn[:, None] + tn[None, :] - 2.0 * (query @ T.T).toarray()
    return np.sqrt(np.maximum(d2, 0.0))


def neighbors(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    """Индексы k ближайших строк; при равных расстояниях берётся меньший индекс."""
    X = as_query(model, matrix)
    k = int(model.hyperparameters["k"])
    out = np.empty((X.shape[0], k), dtype=np.int64)
    for lo in range(0, X.shape[0], CHUNK_ROWS):
        d = distances(model, X[lo:lo + CHUNK_ROWS])
        out[lo:lo + CHUNK_ROWS] = np.argsort(d, axis=1, kind="stable")[:, :k]
    return out


def predict_knn(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    nn = neighbors(model, matrix)
    if nn.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return vote(model.parameters["train_labels"][nn], model.num_classes)
