from __future__ import annotations
import hashlib
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np
import scipy.sparse as sp

from app.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrainSet:
    matrix: sp.csr_matrix
    labels: np.ndarray
    class_names: tuple[str, ...] = ("negative", "positive")

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.float64)
        m.sum_duplicates()
        m.sort_indices()
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

        if y.ndim != 1 or y.shape[0] != m.shape[0]:
            raise ContractError(f"labels length {y.shape[0]} != matrix rows {m.shape[0]}")
        if len(self.class_names) < 2:
            raise ContractError("at least 2 class names are required")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise ContractError(f"labels must lie in [0, {len(self.class_names)})")
        if np.unique(y).size < 2:
            logger.warning("TrainSet has a single class present (%s rows)", y.size)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


def fingerprint(data: TrainSet) -> str:
    """sha256 от матрицы, меток и имён классов."""
    h = hashlib.sha256()
    m = data.matrix
    h.update(np.asarray(m.shape, dtype=np.int64).tobytes())
    h.update(np.asarray(m.indptr, dtype=np.int64).tobytes())
    h.update(np.asarray(m.indices, dtype=np.int64).tobytes())
    h.update(np.asarray(m.data, dtype=np.float64).tobytes())
    h.update(data.labels.tobytes())
    h.update("\x1f".join(data.class_names).encode("utf-8"))
    return h.hexdigest()


def _freeze(arr: Any) -> np.ndarray:
    a = np.array(arr, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Model:
    kind: str
    parameters: Mapping[str, np.ndarray]
    hyperparameters: Mapping[str, Any]
    train_fingerprint: str
    dim: int
    class_names: tuple[str, ...]
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parameters", MappingProxyType({k: _freeze(v) for k, v in self.parameters.items()}))
        object.__setattr__(self, "hyperparameters", MappingProxyType(dict(self.hyperparameters)))
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


def as_query(model: Model, matrix: sp.spmatrix) -> sp.csr_matrix:
    X = sp.csr_matrix(matrix, dtype=np.float64)
    if X.shape[1] != model.dim:
        raise ContractError(f"matrix dim {X.shape[1]} does not match model dim {model.dim}")
    X.sum_duplicates()
    X.sort_indices()
    return X


def vote(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Голосование по строкам labels (m x k); при ничьей побеждает меньший id класса."""
    m = labels.shape[0]
    counts = np.zeros((m, num_classes), dtype=np.int64)
    rows = np.repeat(np.arange(m), labels.shape[1])
    np.add.at(counts, (rows, labels.ravel()), 1)
    return counts.argmax(axis=1)
