from __future__ import annotations
import logging

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import expit

from app.classifiers.base import Model, TrainSet, as_query, fingerprint
from app.errors import TrainingError

logger = logging.getLogger(__name__)


def _ovr_targets(data: TrainSet) -> list[np.ndarray]:
    """Бинарный случай: одна модель (класс 1 положительный), иначе one-vs-rest."""
    if data.num_classes == 2:
        return [(data.labels == 1).astype(np.float64)]
    return [(data.labels == c).astype(np.float64) for c in range(data.num_classes)]


def _decide(scores: np.ndarray) -> np.ndarray:
    if scores.shape[1] == 1:
        # score == 0 уходит к классу 0
        return (scores[:, 0] > 0).astype(np.int64)
    return scores.argmax(axis=1)


def decision_function(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    X = as_query(model, matrix)
    return np.asarray(X @ model.parameters["coef"].T) + model.parameters["intercept"]


# ================================
#     ЛИНЕЙНЫЙ SVM (Pegasos)
# ================================

def svm_objective(X: sp.csr_matrix, y_pm: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    """lam/2 * (|w|^2 + b^2) + среднее hinge. Смещение регуляризуется как обычный признак."""
    margins = y_pm * (np.asarray(X @ w).ravel() + b)
    return 0.5 * lam * (w @ w + b * b) + np.maximum(0.0, 1.0 - margins).mean()


def _pegasos(X: sp.csr_matrix, y_pm: np.ndarray, lam: float, epochs: int, rng: np.random.Generator):
    n, d = X.shape
    indptr, indices, data = X.indptr, X.indices, X.data
    v = np.zeros(d + 1)  # последний элемент: смещение
    scale = 1.0  # w = scale * v, чтобы сжатие было O(1)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            idx, val = indices[lo:hi], data[lo:hi]
            margin = y_pm[i] * scale * (v[idx] @ val + v[d])

            shrink = 1.0 - eta * lam
            if shrink <= 0.0:
                v[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink

            if margin < 1.0:
                step = eta * y_pm[i] / scale
                v[idx] += step * val
                v[d] += step

            if scale < 1e-9:
                v *= scale
                scale = 1.0
    w = scale * v
    return w[:d].copy(), float(w[d])


def train_linear_svm(data: TrainSet, c: float = 1.0, epochs: int = 20, seed: int = 0) -> Model:
    if c <= 0:
        raise TrainingError(f"c must be > 0, got {c}")
    X = data.matrix
    n = max(data.n_rows, 1)
    lam = 1.0 / (c * n)
    rng = np.random.default_rng(seed)

    coefs, intercepts, objectives = [], [], []
    for target in _ovr_targets(data):
        y_pm = 2.0 * target - 1.0
        w, b = _pegasos(X, y_pm, lam, epochs, rng)
        coefs.append(w)
        intercepts.append(b)
        objectives.append(svm_objective(X, y_pm, w, b, lam))

    logger.debug("SVM trained | epochs=%s | objective=%s", epochs, objectives)
    return Model(
        kind="linear_svm",
        parameters={"coef": np.vstack(coefs), "intercept": np.asarray(intercepts)},
        hyperparameters={"c": c, "epochs": epochs, "seed": seed},
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
        diagnostics={"objective": [float(o) for o in objectives], "lambda": lam},
    )


def predict_linear_svm(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    return _decide(decision_function(model, matrix))


# ================================
#     ЛОГИСТИЧЕСКАЯ РЕГРЕССИЯ
# ================================

def logistic_loss_and_grad(params: np.ndarray, X: sp.spmatrix, y01: np.ndarray, l2: float):
    """Сумма log-loss + l2/2 * |w|^2 (смещение без штрафа) и градиент по (w, b)."""
    w, b = params[:-1], params[-1]
    z = np.asarray(X @ w).ravel() + b
    y_pm = 2.0 * y01 - 1.0
    loss = np.logaddexp(0.0, -y_pm * z).sum() + 0.5 * l2 * (w @ w)
    r = expit(z) - y01
    grad = np.empty_like(params)
    grad[:-1] = np.asarray(X.T @ r).ravel() + l2 * w
    grad[-1] = r.sum()
    return float(loss), grad


def train_logistic_regression(
    data: TrainSet, l2: float = 1.0, epochs: int = 100, tol: float = 1e-6, seed: int = 0
) -> Model:
    if l2 < 0:
        raise TrainingError(f"l2 must be >= 0, got {l2}")
    X = data.matrix
    rng = np.random.default_rng(seed)

    coefs, intercepts, losses, iters, converged = [], [], [], [], []
    for target in _ovr_targets(data):
        x0 = rng.normal(0.0, 1e-3, size=data.dim + 1)
        res = minimize(
            logistic_loss_and_grad, x0, args=(X, target, l2), jac=True, method="L-BFGS-B",
            options={"maxiter": epochs, "ftol": tol},
        )
        coefs.append(res.x[:-1])
        intercepts.append(res.x[-1])
        losses.append(float(res.fun))
        iters.append(int(res.nit))
        converged.append(bool(res.success))

    return Model(
        kind="logistic_regression",
        parameters={"coef": np.vstack(coefs), "intercept": np.asarray(intercepts)},
        hyperparameters={"l2": l2, "epochs": epochs, "tol": tol, "seed": seed},
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
        diagnostics={"loss": losses, "iterations": iters, "converged": converged},
    )


def predict_logistic_regression(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    return _decide(decision_function(model, matrix))
