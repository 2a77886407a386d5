from __future__ import annotations
import json
import logging
from pathlib import Path

import numpy as np

from app.classifiers.base import Model
from app.errors import ReportError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_META_KEY = "__meta__"


def save_model(model: Model, path: str | Path) -> Path:
    """
    .npz: массивы параметров + __meta__ (JSON: версия, kind, гиперпараметры,
    fingerprint, dim, классы, диагностика).
    """
    out = Path(path)
    if out.suffix != ".npz":
        out = out.with_suffix(".npz")
    meta = {
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": dict(model.hyperparameters),
        "train_fingerprint": model.train_fingerprint,
        "dim": model.dim,
        "class_names": list(model.class_names),
        "diagnostics": dict(model.diagnostics),
    }
    arrays = {k: np.asarray(v) for k, v in model.parameters.items()}
    if _META_KEY in arrays:
        raise ValueError(f"parameter name {_META_KEY!r} is reserved")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("wb") as fh:
            np.savez(fh, **arrays, **{_META_KEY: np.array(json.dumps(meta, sort_keys=True, default=float))})
    except OSError as e:
        raise ReportError(f"Cannot write model to {out}: {e}") from e
    logger.info("model saved | kind=%s | path=%s", model.kind, out)
    return out


def load_model(path: str | Path) -> Model:
    p = Path(path)
    with np.load(p, allow_pickle=False) as data:
        if _META_KEY not in data.files:
            raise ValueError(f"{p} is not a saved model (no {_META_KEY})")
        meta = json.loads(str(data[_META_KEY]))
        params = {k: data[k] for k in data.files if k != _META_KEY}
    if meta.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {meta.get('version')!r} in {p}")
    return Model(
        kind=meta["kind"],
        parameters=params,
        hyperparameters=meta["hyperparameters"],
        train_fingerprint=meta["train_fingerprint"],
        dim=int(meta["dim"]),
        class_names=tuple(meta["class_names"]),
        diagnostics=meta.get("diagnostics", {}),
    )
