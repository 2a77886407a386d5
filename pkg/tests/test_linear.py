from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.optimize import minimize

from app.classifiers import predict
from app.classifiers.base import TrainSet
from app.classifiers.linear import (
    decision_function,
    logistic_loss_and_grad,
    svm_objective,
    train_linear_svm,
    train_logistic_regression,
)


# --- SVM ---

def test_svm_two_separable_points():
    data = TrainSet(sp.csr_matrix(np.array([[2.0, 0.0], [0.0, 2.0]])), [0, 1])
    model = train_linear_svm(data, c=1.0, epochs=50, seed=0)
    assert predict(model, data.matrix).tolist() == [0, 1]


def test_svm_identical_features_predict_majority():
    X = sp.csr_matrix(np.ones((10, 3)))
    y = [1] * 7 + [0] * 3
    model = train_linear_svm(TrainSet(X, y), epochs=30, seed=1)
    assert set(predict(model, X).tolist()) == {1}


def test_svm_is_reproducible():
    rng = np.random.default_rng(0)
    X = sp.csr_matrix(rng.random((40, 6)))
    y = (rng.random(40) > 0.5).astype(int)
    a = train_linear_svm(TrainSet(X, y), seed=11)
    b = train_linear_svm(TrainSet(X, y), seed=11)
    assert np.array_equal(a.parameters["coef"], b.parameters["coef"])
    assert a.diagnostics["objective"] == b.diagnostics["objective"]


def test_svm_objective_close_to_reference_solver():
    rng = np.random.default_rng(5)
    pos = rng.normal([2.0, 2.0], 0.6, size=(20, 2))
    neg = rng.normal([-2.0, -2.0], 0.6, size=(20, 2))
    dense = np.vstack([pos, neg])
    y = np.r_[np.ones(20, dtype=int), np.zeros(20, dtype=int)]
    X = sp.csr_matrix(dense)
    c = 0.05
    lam = 1.0 / (c * len(y))

    model = train_linear_svm(TrainSet(X, y), c=c, epochs=2000, seed=0)
    got = model.diagnostics["objective"][0]

    # эталон: SLSQP на (w, b, xi) с ограничениями hinge
    y_pm = 2.0 * y - 1.0
    n, d = dense.shape

    def obj(z):
        w, b, xi = z[:d], z[d], z[d + 1:]
        return 0.5 * lam * (w @ w + b * b) + xi.mean()

    cons = [
        {"type": "ineq", "fun": lambda z: y_pm * (dense @ z[:d] + z[d]) - 1.0 + z[d + 1:]},
        {"type": "ineq", "fun": lambda z: z[d + 1:]},
    ]
    ref = minimize(obj, np.zeros(d + 1 + n), constraints=cons, method="SLSQP", options={"maxiter": 500})
    ref_obj = svm_objective(X, y_pm, ref.x[:d], ref.x[d], lam)
    assert got <= ref_obj * 1.05 + 1e-9


def test_svm_multiclass_one_vs_rest():
    X = sp.csr_matrix(np.array([[3.0, 0, 0], [0, 3.0, 0], [0, 0, 3.0]] * 4))
    y = [0, 1, 2] * 4
    model = train_linear_svm(TrainSet(X, y, ("a", "b", "c")), epochs=100, seed=0)
    assert model.parameters["coef"].shape == (3, 3)
    assert predict(model, X).tolist() == y


# --- логистическая регрессия ---

def test_lr_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    X = sp.csr_matrix(rng.random((30, 8)) * (rng.random((30, 8)) < 0.5))
    y = (rng.random(30) > 0.5).astype(float)
    eps = 1e-6
    for _ in range(10):
        params = rng.normal(0.0, 1.0, size=9)
        _, grad = logistic_loss_and_grad(params, X, y, l2=0.3)
        numeric = np.empty_like(params)
        for j in range(params.size):
            step = np.zeros_like(params)
            step[j] = eps
            hi, _ = logistic_loss_and_grad(params + step, X, y, 0.3)
            lo, _ = logistic_loss_and_grad(params - step, X, y, 0.3)
            numeric[j] = (hi - lo) / (2 * eps)
        rel = np.abs(grad - numeric) / np.maximum(np.abs(numeric), 1.0)
        assert rel.max() < 1e-5


def test_lr_single_correlated_feature():
    X = sp.csr_matrix(np.array([[1.0], [1.0], [0.0], [0.0]]))
    y = [1, 1, 0, 0]
    model = train_logistic_regression(TrainSet(X, y), l2=1.0)
    w = model.parameters["coef"][0, 0]
    assert np.isfinite(w) and w > 0
    assert predict(model, X).tolist() == y


def test_lr_empty_documents_predict_prior():
    X = sp.csr_matrix((6, 4))
    y = [1, 1, 1, 1, 0, 0]
    model = train_logistic_regression(TrainSet(X, y))
    assert model.parameters["intercept"][0] > 0
    assert predict(model, X).tolist() == [1] * 6


def test_lr_zero_rows_follow_sign_of_bias(separable):
    model = train_logistic_regression(separable, seed=3)
    zeros = sp.csr_matrix((4, separable.dim))
    expected = int(model.parameters["intercept"][0] > 0)
    assert predict(model, zeros).tolist() == [expected] * 4
    np.testing.assert_allclose(decision_function(model, zeros)[:, 0], model.parameters["intercept"][0])


def test_lr_is_reproducible(separable):
    a = train_logistic_regression(separable, seed=4)
    b = train_logistic_regression(separable, seed=4)
    assert np.array_equal(a.parameters["coef"], b.parameters["coef"])


@pytest.mark.parametrize("l2", [0.0, 10.0])
def test_lr_accepts_penalty_range(separable, l2):
    model = train_logistic_regression(separable, l2=l2, epochs=30)
    assert (predict(model, separable.matrix) == separable.labels).mean() >= 0.95
