from __future__ import annotations
import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from app.classifiers.base import Model, TrainSet, as_query, fingerprint
from app.errors import TrainingError


def train_multinomial_nb(data: TrainSet, alpha: float = 1.0) -> Model:
    """
    Лог-априорные вероятности из частот меток, лог-правдоподобия из сумм весов признаков
    по классу со сглаживанием Лапласа (alpha на каждый признак).
    """
    if alpha < 0:
        raise TrainingError(f"alpha must be >= 0, got {alpha}")
    X = data.matrix
    if X.nnz and X.data.min() < 0:
        raise TrainingError("multinomial NB requires non-negative feature weights")

    K = data.num_classes
    n = data.n_rows
    onehot = sp.csr_matrix((np.ones(n), (np.arange(n), data.labels)), shape=(n, K))
    feature_count = np.asarray((onehot.T @ X).todense())  # K x dim
    class_count = np.bincount(data.labels, minlength=K).astype(np.float64)

    if alpha == 0 and (feature_count == 0).any():
        raise TrainingError("alpha=0 leaves a term with zero count in some class; use alpha > 0")

    with np.errstate(divide="ignore"):
        class_log_prior = np.log(class_count / max(n, 1))
        smoothed = feature_count + alpha
        feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))

    return Model(
        kind="multinomial_nb",
        parameters={"class_log_prior": class_log_prior, "feature_log_prob": feature_log_prob},
        hyperparameters={"alpha": alpha},
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
    )


def joint_log_likelihood(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    X = as_query(model, matrix)
    flp = model.parameters["feature_log_prob"]
    return np.asarray(X @ flp.T) + model.parameters["class_log_prior"]


def posterior_log_proba(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    jll = joint_log_likelihood(model, matrix)
    return jll - logsumexp(jll, axis=1, keepdims=True)


def predict_multinomial_nb(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    # argmax берёт первый максимум: ничья уходит к меньшему id
    return joint_log_likelihood(model, matrix).argmax(axis=1)
