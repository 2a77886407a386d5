from __future__ import annotations
import logging
import math
from typing import NamedTuple, Optional, Union

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from app.classifiers.base import Model, TrainSet, as_query, fingerprint, vote
from app.errors import TrainingError

logger = logging.getLogger(__name__)

FeatureSubsample = Union[str, float]


class Split(NamedTuple):
    feature: int
    threshold: float
    impurity: float  # взвешенный Gini детей


# ================================
#     ПОИСК РАЗБИЕНИЯ
# ================================

def best_split(
    X: sp.csr_matrix,
    y: np.ndarray,
    rows: np.ndarray,
    num_classes: int,
    min_leaf: int = 1,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Optional[Split]:
    """
    Лучшее разбиение узла по Gini. Условие: x[feature] <= threshold -> влево,
    отсутствующий признак = 0. Кандидаты: наблюдаемые ненулевые значения плюс 0.
    При ничьей берётся меньший (feature, threshold). Разбиение без выигрыша допускается.
    max_features: сколько признаков (из ненулевых в узле) случайно рассматривать.
    """
    rows = np.asarray(rows, dtype=np.int64)
    n = rows.size
    K = num_classes
    if n < 2 * min_leaf:
        return None

    node_y = y[rows]
    sub = X[rows].tocoo()
    keep = sub.data != 0
    cols, vals, cls = sub.col[keep].astype(np.int64), sub.data[keep], node_y[sub.row[keep]]

    if max_features is not None:
        active = np.unique(cols)
        if max_features < active.size:
            if rng is None:
                raise ValueError("rng is required when max_features is set")
            chosen = rng.choice(active, size=max_features, replace=False)
            sel = np.isin(cols, chosen)
            cols, vals, cls = cols[sel], vals[sel], cls[sel]
    if cols.size == 0:
        return None

    order = np.lexsort((vals, cols))
    cols, vals, cls = cols[order], vals[order], cls[order]
    m = cols.size

    onehot = np.zeros((m, K))
    onehot[np.arange(m), cls] = 1.0
    cum = np.cumsum(onehot, axis=0)

    # группы = признаки
    start_flag = np.r_[True, cols[1:] != cols[:-1]]
    starts = np.flatnonzero(start_flag)
    ends = np.r_[starts[1:], m] - 1
    gid = np.cumsum(start_flag) - 1
    before = np.vstack([np.zeros((1, K)), cum])[starts]
    within = cum - before[gid]

    node_counts = np.bincount(node_y, minlength=K).astype(np.float64)
    zero_counts = node_counts - within[ends]

    # порог = наблюдаемое значение (последнее в серии равных)
    last = np.r_[(cols[1:] != cols[:-1]) | (vals[1:] != vals[:-1]), True]
    val_left = within[last] + (vals[last] > 0)[:, None] * zero_counts[gid[last]]
    val_feat = cols[last]
    val_thr = vals[last]

    # порог 0: отрицательные и нули влево
    n_neg = np.add.reduceat((vals < 0).astype(np.int64), starts)
    neg_idx = np.maximum(starts + n_neg - 1, 0)
    neg_left = np.where((n_neg > 0)[:, None], within[neg_idx], 0.0)
    has_zero = zero_counts.sum(axis=1) > 0
    zero_left = (neg_left + zero_counts)[has_zero]

    left = np.vstack([val_left, zero_left])
    feat = np.r_[val_feat, cols[starts][has_zero]]
    thr = np.r_[val_thr, np.zeros(int(has_zero.sum()))]

    n_left = left.sum(axis=1)
    n_right = n - n_left
    valid = (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    left, feat, thr, n_left, n_right = left[valid], feat[valid], thr[valid], n_left[valid], n_right[valid]
    right = node_counts - left

    gini = (n_left - (left ** 2).sum(axis=1) / n_left + n_right - (right ** 2).sum(axis=1) / n_right) / n
    pick = np.lexsort((thr, feat, gini))[0]
    return Split(int(feat[pick]), float(thr[pick]), float(gini[pick]))


# ================================
#     ПОСТРОЕНИЕ ДЕРЕВА
# ================================

def _grow(
    X: sp.csr_matrix,
    y: np.ndarray,
    num_classes: int,
    rows: np.ndarray,
    max_depth: Optional[int],
    min_leaf: int,
    max_features: Optional[int],
    rng: np.random.Generator,
) -> dict:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[np.ndarray] = []

    def new_node(r: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[r], minlength=num_classes))
        return len(feature) - 1

    root = new_node(rows)
    stack = [(root, rows, 0)]
    depth_reached = 0
    while stack:
        nid, r, depth = stack.pop()
        depth_reached = max(depth_reached, depth)
        counts = value[nid]
        if counts.max(initial=0) == r.size:
            continue  # чистый узел (или пустой)
        if max_depth is not None and depth >= max_depth:
            continue
        split = best_split(X, y, r, num_classes, min_leaf=min_leaf, max_features=max_features, rng=rng)
        if split is None:
            continue

        col = X[r].getcol(split.feature).toarray().ravel()
        go_left = col <= split.threshold
        lid = new_node(r[go_left])
        rid = new_node(r[~go_left])
        feature[nid], threshold[nid], left[nid], right[nid] = split.feature, split.threshold, lid, rid
        stack.append((rid, r[~go_left], depth + 1))
        stack.append((lid, r[go_left], depth + 1))

    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "value": np.vstack(value).astype(np.int64),
        "depth": depth_reached,
    }


def _stack_trees(trees: list[dict]) -> dict[str, np.ndarray]:
    """Склеивает деревья в общие массивы; индексы детей становятся глобальными."""
    offsets = np.cumsum([0] + [t["feature"].size for t in trees])

    def shift(a: np.ndarray, off: int) -> np.ndarray:
        return np.where(a >= 0, a + off, -1)

    return {
        "feature": np.concatenate([t["feature"] for t in trees]),
        "threshold": np.concatenate([t["threshold"] for t in trees]),
        "left": np.concatenate([shift(t["left"], off) for t, off in zip(trees, offsets)]),
        "right": np.concatenate([shift(t["right"], off) for t, off in zip(trees, offsets)]),
        "value": np.vstack([t["value"] for t in trees]),
        "tree_offsets": offsets.astype(np.int64),
    }


def _check_common(max_depth: Optional[int], min_leaf: int) -> None:
    if min_leaf < 1:
        raise TrainingError(f"min_leaf must be >= 1, got {min_leaf}")
    if max_depth is not None and max_depth < 1:
        raise TrainingError(f"max_depth must be >= 1 or None, got {max_depth}")


def train_decision_tree(
    data: TrainSet,
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    seed: int = 0,
    max_features: Optional[int] = None,
) -> Model:
    """CART по Gini. seed нужен только при max_features (случайный отбор признаков в узле)."""
    _check_common(max_depth, min_leaf)
    rng = np.random.default_rng(seed)
    tree = _grow(data.matrix, data.labels, data.num_classes, np.arange(data.n_rows), max_depth, min_leaf,
                 max_features, rng)
    params = _stack_trees([tree])
    logger.debug("tree grown | nodes=%s | depth=%s", params["feature"].size, tree["depth"])
    return Model(
        kind="decision_tree",
        parameters=params,
        hyperparameters={"max_depth": max_depth, "min_leaf": min_leaf, "seed": seed, "max_features": max_features},
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
        diagnostics={"n_nodes": [int(params["feature"].size)], "depth": [tree["depth"]]},
    )


def resolve_max_features(feature_subsample: FeatureSubsample, dim: int) -> Optional[int]:
    """None: смотреть все признаки."""
    if feature_subsample == "sqrt":
        m = max(1, int(math.sqrt(dim)))
    else:
        ratio = float(feature_subsample)
        if not 0.0 < ratio <= 1.0:
            raise TrainingError(f"feature_subsample must be 'sqrt' or in (0, 1], got {feature_subsample}")
        m = max(1, int(ratio * dim))
    return None if m >= dim else m


def train_random_forest(
    data: TrainSet,
    n_trees: int = 100,
    max_depth: Optional[int] = None,
    feature_subsample: FeatureSubsample = "sqrt",
    seed: int = 0,
    bootstrap: bool = True,
    min_leaf: int = 1,
    n_jobs: int = 1,
) -> Model:
    if n_trees < 1:
        raise TrainingError(f"n_trees must be >= 1, got {n_trees}")
    _check_common(max_depth, min_leaf)
    max_features = resolve_max_features(feature_subsample, data.dim)
    X, y, n = data.matrix, data.labels, data.n_rows

    def grow_one(t: int) -> dict:
        # у каждого дерева свой генератор, результат не зависит от n_jobs
        rng = np.random.default_rng(seed + t)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        return _grow(X, y, data.num_classes, rows, max_depth, min_leaf, max_features, rng)

    if n_jobs == 1:
        trees = [grow_one(t) for t in range(n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(grow_one)(t) for t in range(n_trees))

    params = _stack_trees(trees)
    logger.debug("forest grown | trees=%s | nodes=%s", n_trees, params["feature"].size)
    return Model(
        kind="random_forest",
        parameters=params,
        hyperparameters={
            "n_trees": n_trees,
            "max_depth": max_depth,
            "feature_subsample": feature_subsample,
            "seed": seed,
            "bootstrap": bootstrap,
            "min_leaf": min_leaf,
        },
        train_fingerprint=fingerprint(data),
        dim=data.dim,
        class_names=data.class_names,
        diagnostics={
            "n_nodes": [int(t["feature"].size) for t in trees],
            "depth": [t["depth"] for t in trees],
            "max_features": max_features,
        },
    )


# ================================
#     ПРЕДСКАЗАНИЕ
# ================================

def apply(model: Model, matrix: sp.spmatrix, tree: int = 0) -> np.ndarray:
    """Номера листьев (глобальные) для каждой строки."""
    X = as_query(model, matrix)
    p = model.parameters
    node = np.full(X.shape[0], p["tree_offsets"][tree], dtype=np.int64)
    while True:
        f = p["feature"][node]
        idx = np.flatnonzero(f >= 0)
        if idx.size == 0:
            return node
        x = np.asarray(X[idx, f[idx]]).ravel()
        here = node[idx]
        node[idx] = np.where(x <= p["threshold"][here], p["left"][here], p["right"][here])


def predict_tree(model: Model, matrix: sp.spmatrix) -> np.ndarray:
    n_trees = model.parameters["tree_offsets"].size - 1
    value = model.parameters["value"]
    per_tree = np.column_stack([value[apply(model, matrix, t)].argmax(axis=1) for t in range(n_trees)])
    if n_trees == 1:
        return per_tree[:, 0]
    return vote(per_tree, model.num_classes)
