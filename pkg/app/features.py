from __future__ import annotations
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp

from app.errors import ContractError, VocabularyError
from app.logging_setup import kv
from app.models.documents import TokenStream

logger = logging.getLogger(__name__)

IdfVariant = Literal["log10", "ln", "raw"]
Scheme = Literal["ngram", "tfidf"]

# SparseVector: csr 1 x dim, SparseMatrix: csr N x dim.
# Индексы отсортированы, явных нулей нет.


@dataclass(frozen=True, eq=False)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: np.ndarray
    num_docs: int
    n: int = 1
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        df = np.asarray(self.doc_freq, dtype=np.int64)
        df.setflags(write=False)
        object.__setattr__(self, "doc_freq", df)
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})
        if len(df) != len(self.terms):
            raise VocabularyError("doc_freq length must equal number of terms")
        if len(self.index) != len(self.terms):
            raise VocabularyError("vocabulary terms must be distinct")
        if len(df) and (df.min() < 1 or df.max() > self.num_docs):
            raise VocabularyError("every doc_freq must lie in [1, num_docs]")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return len(self.terms)


def extract_ngrams(stream: TokenStream | Sequence[str], n: int) -> list[str]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    words = stream.words if isinstance(stream, TokenStream) else tuple(stream)
    if n == 1:
        return list(words)
    return [" ".join(words[i:i + n]) for i in range(len(words) - n + 1)]


def build_vocabulary(
    streams: Sequence[TokenStream],
    n: int = 1,
    min_df: int = 1,
    max_features: Optional[int] = None,
) -> Vocabulary:
    """
    Словарь строится только по обучающей выборке.
    Отбор: df >= min_df, ранжирование (df desc, term asc), усечение до max_features,
    затем сортировка по алфавиту (номера колонок стабильны).
    """
    if not streams:
        raise VocabularyError("cannot build a vocabulary from an empty training set")

    df: Counter[str] = Counter()
    for s in streams:
        df.update(set(extract_ngrams(s, n)))

    ranked = sorted(((t, c) for t, c in df.items() if c >= min_df), key=lambda tc: (-tc[1], tc[0]))
    if max_features is not None:
        ranked = ranked[:max_features]
    ranked.sort(key=lambda tc: tc[0])

    vocab = Vocabulary(
        terms=tuple(t for t, _ in ranked),
        doc_freq=np.array([c for _, c in ranked], dtype=np.int64),
        num_docs=len(streams),
        n=n,
    )
    logger.info(kv("VOCAB", n=n, docs=len(streams), distinct=len(df), kept=len(vocab), min_df=min_df,
                   max_features=max_features))
    return vocab


def count_matrix(streams: Sequence[TokenStream], vocab: Vocabulary) -> sp.csr_matrix:
    """Сырые счётчики n-грамм из словаря; OOV игнорируются."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for s in streams:
        c = Counter(vocab.index[g] for g in extract_ngrams(s, vocab.n) if g in vocab.index)
        for j in sorted(c):
            indices.append(j)
            data.append(float(c[j]))
        indptr.append(len(indices))

    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(streams), vocab.dim),
    )


def count_vectorize(stream: TokenStream, vocab: Vocabulary, n: Optional[int] = None) -> sp.csr_matrix:
    if n is not None and n != vocab.n:
        raise ContractError(f"vocabulary was built with n={vocab.n}, got n={n}")
    return count_matrix([stream], vocab)


def term_frequency(counts: sp.spmatrix) -> sp.csr_matrix:
    """TF(i, j) = n(i, j) / sum_k n(k, j) по строкам; пустые строки остаются пустыми."""
    tf = sp.csr_matrix(counts, dtype=np.float64, copy=True)
    tf.sum_duplicates()
    row_sums = np.asarray(tf.sum(axis=1)).ravel()
    denom = np.repeat(row_sums, np.diff(tf.indptr))
    nonzero = denom != 0
    tf.data[nonzero] = tf.data[nonzero] / denom[nonzero]
    tf.data[~nonzero] = 0.0
    tf.eliminate_zeros()
    tf.sort_indices()
    return tf


def inverse_document_frequency(vocab: Vocabulary, variant: IdfVariant = "log10") -> np.ndarray:
    """IDF_i = log(N / n_i); variant=raw: просто отношение N / n_i."""
    if vocab.num_docs < 1:
        raise VocabularyError("num_docs must be >= 1")
    ratio = vocab.num_docs / vocab.doc_freq.astype(np.float64)
    if variant == "log10":
        idf = np.log10(ratio)
    elif variant == "ln":
        idf = np.log(ratio)
    elif variant == "raw":
        idf = ratio
    else:
        raise ValueError(f"unknown idf variant {variant!r}")
    idf.setflags(write=False)
    return idf


def tfidf_transform(
    counts: sp.spmatrix,
    vocab: Vocabulary,
    variant: IdfVariant = "log10",
    idf: Optional[np.ndarray] = None,
) -> sp.csr_matrix:
    if counts.shape[1] != vocab.dim:
        raise ContractError(f"count matrix has dim {counts.shape[1]}, vocabulary has {vocab.dim}")
    weights = inverse_document_frequency(vocab, variant) if idf is None else idf
    if vocab.dim == 0:
        return sp.csr_matrix((counts.shape[0], 0), dtype=np.float64)
    out = sp.csr_matrix(term_frequency(counts) @ sp.diags(weights, format="csr"))
    out.eliminate_zeros()
    out.sort_indices()
    return out


# ================================
#     ПРОСТРАНСТВО ПРИЗНАКОВ
# ================================

@dataclass(frozen=True, eq=False)
class FeatureSpace:
    """Словарь + IDF, посчитанные по train; transform их не меняет."""

    scheme: Scheme
    vocab: Vocabulary
    idf_variant: IdfVariant = "log10"
    idf: Optional[np.ndarray] = None

    @staticmethod
    def fit(
        train_streams: Sequence[TokenStream],
        scheme: Scheme,
        *,
        n: int,
        min_df: int = 1,
        max_features: Optional[int] = None,
        idf_variant: IdfVariant = "log10",
    ) -> "FeatureSpace":
        vocab = build_vocabulary(train_streams, n=n, min_df=min_df, max_features=max_features)
        idf = inverse_document_frequency(vocab, idf_variant) if scheme == "tfidf" else None
        return FeatureSpace(scheme=scheme, vocab=vocab, idf_variant=idf_variant, idf=idf)

    @property
    def dim(self) -> int:
        return self.vocab.dim

    def transform(self, streams: Sequence[TokenStream]) -> sp.csr_matrix:
        counts = count_matrix(streams, self.vocab)
        if self.scheme == "ngram":
            return counts
        return tfidf_transform(counts, self.vocab, self.idf_variant, idf=self.idf)


def dump_vocabulary(
    vocab: Vocabulary, path: str | Path, idf: Optional[np.ndarray] = None, variant: IdfVariant = "log10"
) -> Path:
    """TSV: term, column_id, doc_freq, idf в порядке номеров колонок."""
    weights = inverse_document_frequency(vocab, variant) if idf is None else idf
    frame = pd.DataFrame({
        "term": list(vocab.terms),
        "column_id": np.arange(vocab.dim),
        "doc_freq": vocab.doc_freq,
        "idf": weights,
    })
    out = Path(path)
    frame.to_csv(out, sep="\t", index=False, float_format="%.12g", lineterminator="\n")
    return out
