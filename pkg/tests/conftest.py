from __future__ import annotations
import random
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from app.classifiers.base import TrainSet
from app.config import RunConfig

POSITIVE = ["great", "wonderful", "excellent", "loved", "brilliant", "superb", "enjoyable", "masterpiece"]
NEGATIVE = ["awful", "boring", "terrible", "waste", "dull", "horrible", "worst", "poor"]
NEUTRAL = ["movie", "film", "plot", "actor", "scene", "story", "director", "ending", "camera", "music"]


def make_review(rng: random.Random, positive: bool) -> str:
    words = rng.sample(POSITIVE if positive else NEGATIVE, 3) + rng.sample(NEUTRAL, 5)
    rng.shuffle(words)
    return "The " + " ".join(words) + ". Really!"


def write_imdb_tree(root: Path, per_class: int = 12, seed: int = 0, with_test: bool = True) -> Path:
    rng = random.Random(seed)
    for split in ("train", "test"):
        for polarity in ("pos", "neg"):
            d = root / split / polarity
            d.mkdir(parents=True, exist_ok=True)
            if split == "test" and not with_test:
                continue
            for i in range(per_class):
                rating = 8 if polarity == "pos" else 2
                text = make_review(rng, polarity == "pos")
                if i == 0:
                    text += " <br /><br />Seen it twice."
                (d / f"{i}_{rating}.txt").write_text(text, encoding="utf-8")
    return root


def write_alexa_tsv(path: Path, n_pos: int = 30, n_neg: int = 10, seed: int = 1) -> Path:
    rng = random.Random(seed)
    lines = ["rating\tdate\tvariation\tverified_reviews\tfeedback"]
    labels = [1] * n_pos + [0] * n_neg
    rng.shuffle(labels)
    for i, lab in enumerate(labels):
        rating = 5 if lab else 1
        lines.append(f"{rating}\t31-Jul-18\tCharcoal Fabric\t{make_review(rng, bool(lab))}\t{lab}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def imdb_root(tmp_path: Path) -> Path:
    return write_imdb_tree(tmp_path / "aclImdb")


@pytest.fixture
def alexa_tsv(tmp_path: Path) -> Path:
    return write_alexa_tsv(tmp_path / "amazon_alexa.tsv")


@pytest.fixture
def small_config(imdb_root: Path, alexa_tsv: Path, tmp_path: Path) -> RunConfig:
    """Полная сетка 2 x 2 x 6 на крошечных фикстурах, с облегчёнными гиперпараметрами."""
    return RunConfig(
        imdb_path=str(imdb_root),
        alexa_path=str(alexa_tsv),
        out_dir=str(tmp_path / "out"),
        svm_epochs=5,
        lr_epochs=50,
        forest_n_trees=5,
    )


def separable_set(n: int = 200, dim: int = 20, seed: int = 0) -> TrainSet:
    """Неотрицательные признаки, классы разделяются по знаку разности двух блоков."""
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], n // 2)
    dense = rng.random((n, dim)) * (rng.random((n, dim)) < 0.3)
    half = dim // 2
    dense[labels == 0, :half] += 1.0 + rng.random((n // 2, half))
    dense[labels == 1, half:] += 1.0 + rng.random((n // 2, dim - half))
    return TrainSet(sp.csr_matrix(dense), labels)


@pytest.fixture
def separable() -> TrainSet:
    return separable_set()
