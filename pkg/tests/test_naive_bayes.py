from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.special import logsumexp

from app.classifiers import predict, train
from app.classifiers.base import TrainSet
from app.classifiers.naive_bayes import posterior_log_proba, train_multinomial_nb
from app.errors import TrainingError


def test_two_doc_fixture():
    # d1 = [a] -> class 0, d2 = [b] -> class 1
    data = TrainSet(sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 1.0]])), [0, 1])
    model = train_multinomial_nb(data, alpha=1.0)
    assert predict(model, sp.csr_matrix(np.array([[1.0, 0.0]]))).tolist() == [0]
    assert predict(model, data.matrix).tolist() == [0, 1]


def test_symmetric_priors():
    X = sp.csr_matrix(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]))
    model = train_multinomial_nb(TrainSet(X, [0, 0, 1, 1]))
    np.testing.assert_allclose(np.exp(model.parameters["class_log_prior"]), [0.5, 0.5])


def _dense_nb_log_posterior(X: np.ndarray, y: np.ndarray, Q: np.ndarray, alpha: float) -> np.ndarray:
    K = 2
    log_prior = np.log(np.array([np.mean(y == c) for c in range(K)]))
    out = np.zeros((Q.shape[0], K))
    for c in range(K):
        counts = X[y == c].sum(axis=0) + alpha
        log_lik = np.log(counts / counts.sum())
        for i in range(Q.shape[0]):
            out[i, c] = log_prior[c] + sum(Q[i, j] * log_lik[j] for j in range(Q.shape[1]))
    return out - logsumexp(out, axis=1, keepdims=True)


@pytest.mark.parametrize("seed", range(5))
def test_posterior_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(50, 30)).astype(float) * (rng.random((50, 30)) < 0.4)
    y = np.r_[np.zeros(25, dtype=int), np.ones(25, dtype=int)]
    Q = rng.integers(0, 3, size=(10, 30)).astype(float)
    model = train_multinomial_nb(TrainSet(sp.csr_matrix(X), y), alpha=0.7)
    got = posterior_log_proba(model, sp.csr_matrix(Q))
    np.testing.assert_allclose(got, _dense_nb_log_posterior(X, y, Q, 0.7), rtol=0, atol=1e-10)


def test_alpha_zero_with_missing_term_is_rejected():
    data = TrainSet(sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 1.0]])), [0, 1])
    with pytest.raises(TrainingError, match="alpha > 0"):
        train_multinomial_nb(data, alpha=0.0)


def test_negative_weights_are_rejected():
    data = TrainSet(sp.csr_matrix(np.array([[-1.0, 0.0], [0.0, 1.0]])), [0, 1])
    with pytest.raises(TrainingError):
        train("multinomial_nb", data)


def test_empty_row_falls_back_to_prior():
    X = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 2.0]]))
    model = train_multinomial_nb(TrainSet(X, [0, 1, 1]))
    assert predict(model, sp.csr_matrix((1, 2))).tolist() == [1]
