from __future__ import annotations
import hashlib
import io
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from app.errors import CorpusIOError, CorpusLoadError, SchemaError, SplitError
from app.logging_setup import kv
from app.models.documents import CLASS_NAMES, Corpus, Document, LoadReport

logger = logging.getLogger(__name__)

IMDB_SUBDIRS: tuple[str, ...] = ("train/pos", "train/neg", "test/pos", "test/neg")
IMDB_LABELS = {"pos": "positive", "neg": "negative"}
ALEXA_LABELS = {"1": "positive", "0": "negative"}


# ================================
#     ПРОПУСКИ
# ================================

def _is_blank(v: Any) -> bool:
    if v is None:
        return True
    if isinstance(v, float) and math.isnan(v):
        return True
    return str(v).strip() == ""


def _class_summary(corpus: Corpus) -> str:
    return ",".join(f"{name}:{n}" for name, n in corpus.class_counts().items())


def drop_missing(
    rows: List[Dict[str, Any]], text_key: str = "text", label_key: str = "label"
) -> Tuple[List[Dict[str, Any]], int]:
    """Оставляем строки, где и текст, и метка есть и не пустые. Порядок сохраняется."""
    kept = [r for r in rows if not _is_blank(r.get(text_key)) and not _is_blank(r.get(label_key))]
    return kept, len(rows) - len(kept)


# ================================
#     IMDB (aclImdb)
# ================================

def _decode(raw: bytes) -> tuple[str, bool]:
    try:
        return raw.decode("utf-8"), False
    except UnicodeDecodeError:
        # битые байты заменяем на U+FFFD, файл считаем в отчёте
        return raw.decode("utf-8", errors="replace"), True


def load_imdb(root_path: str | Path) -> Corpus:
    root = Path(root_path)
    missing = [str(root / sub) for sub in IMDB_SUBDIRS if not (root / sub).is_dir()]
    if missing:
        raise CorpusLoadError(
            f"IMDB layout incomplete under {root}: missing {', '.join(missing)}", missing=missing
        )

    files: list[Path] = []
    for sub in IMDB_SUBDIRS:
        files.extend(p for p in (root / sub).iterdir() if p.is_file() and p.suffix == ".txt")
    # порядок лексикографический по относительному пути
    files.sort(key=lambda p: p.relative_to(root).as_posix())

    documents: list[Document] = []
    dropped = 0
    undecodable = 0
    for p in files:
        rel = p.relative_to(root).as_posix()
        split, polarity = rel.split("/")[:2]
        try:
            text, bad = _decode(p.read_bytes())
        except OSError as e:
            raise CorpusIOError(f"Cannot read {p}: {e}") from e
        undecodable += int(bad)
        if not text.strip():
            dropped += 1
            continue
        documents.append(Document(id=rel, text=text, label=IMDB_LABELS[polarity], split=split))

    report = LoadReport(dataset="imdb", loaded=len(documents), dropped_missing=dropped, undecodable=undecodable)
    corpus = Corpus(name="imdb", documents=documents, class_names=list(CLASS_NAMES), load_report=report)
    logger.info(kv("LOAD imdb", root=root, loaded=report.loaded, dropped=dropped, undecodable=undecodable,
                   classes=_class_summary(corpus)))
    return corpus


# ================================
#     AMAZON ALEXA (TSV)
# ================================

def _resolve_column(wanted: str, headers: list[str]) -> str:
    if headers.count(wanted) == 1:
        return wanted
    matches = [h for h in headers if h.strip().lower() == wanted.strip().lower()]
    if len(matches) == 1:
        return matches[0]
    reason = "ambiguous" if matches else "absent"
    raise SchemaError(
        f"Column {wanted!r} is {reason}; available headers: {', '.join(headers)}", available=headers
    )


def load_alexa(
    tsv_path: str | Path,
    text_column: str = "verified_reviews",
    label_column: str = "feedback",
) -> Corpus:
    path = Path(tsv_path)
    try:
        content, bad_bytes = _decode(path.read_bytes())
        df = pd.read_csv(io.StringIO(content), sep="\t", dtype=str, keep_default_na=False)
    except (OSError, UnicodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise CorpusIOError(f"Cannot read Alexa TSV {path}: {e}") from e

    headers = [str(c) for c in df.columns]
    text_col = _resolve_column(text_column, headers)
    label_col = _resolve_column(label_column, headers)
    # строки с битыми байтами (U+FFFD после замены); в корректном UTF-8 не считаем
    undecodable = sum("\ufffd" in t for t in df[text_col].tolist()) if bad_bytes else 0

    rows = [
        {"id": str(i), "text": t, "label": lab}
        for i, (t, lab) in enumerate(zip(df[text_col].tolist(), df[label_col].tolist()))
    ]
    kept, dropped = drop_missing(rows)

    documents: list[Document] = []
    invalid = 0
    for r in kept:
        label = ALEXA_LABELS.get(str(r["label"]).strip())
        if label is None:
            invalid += 1
            continue
        documents.append(Document(id=r["id"], text=r["text"], label=label))

    report = LoadReport(
        dataset="alexa", loaded=len(documents), dropped_missing=dropped, invalid_label=invalid,
        undecodable=undecodable,
    )
    corpus = Corpus(name="alexa", documents=documents, class_names=list(CLASS_NAMES), load_report=report)
    logger.info(kv("LOAD alexa", path=path, rows=len(rows), loaded=report.loaded, dropped=dropped,
                   invalid_label=invalid, undecodable=undecodable, classes=_class_summary(corpus)))
    return corpus


# ================================
#     РАЗБИЕНИЯ
# ================================

def _rank_key(seed: int, doc_id: str) -> str:
    # ключ зависит только от (seed, id)
    return hashlib.sha256(f"{seed}:{doc_id}".encode("utf-8")).hexdigest()


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_corpus(corpus: Corpus, test_fraction: float, seed: int) -> Corpus:
    """Стратифицированное разбиение: в тест идут первые round(n_c * fraction) документов класса по хэшу."""
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must be in (0, 1), got {test_fraction}")

    by_class: dict[str, list[Document]] = {name: [] for name in corpus.class_names}
    for d in corpus.documents:
        by_class[d.label].append(d)
    for name, docs in by_class.items():
        if len(docs) < 2:
            raise SplitError(f"class {name!r} has {len(docs)} document(s); need at least 2 to split")

    test_ids: set[str] = set()
    for docs in by_class.values():
        ranked = sorted(docs, key=lambda d: _rank_key(seed, d.id))
        n_test = _round_half_up(len(docs) * test_fraction)
        test_ids.update(d.id for d in ranked[:n_test])

    documents = [
        d.model_copy(update={"split": "test" if d.id in test_ids else "train"}) for d in corpus.documents
    ]
    logger.info(kv("SPLIT", corpus=corpus.name, test_fraction=test_fraction, seed=seed,
                   train=len(documents) - len(test_ids), test=len(test_ids)))
    return corpus.model_copy(update={"documents": documents})


def subsample_corpus(corpus: Corpus, size: int, seed: int) -> Corpus:
    """
    Стратифицированная подвыборка по (split, label) с пропорциональным распределением
    (метод наибольших остатков). Порядок документов сохраняется.
    """
    total = len(corpus.documents)
    if size >= total:
        return corpus
    if size < 1:
        raise SplitError(f"subsample size must be >= 1, got {size}")

    strata: dict[tuple[Optional[str], str], list[Document]] = {}
    for d in corpus.documents:
        strata.setdefault((d.split, d.label), []).append(d)

    keys = sorted(strata, key=lambda k: (k[0] or "", k[1]))
    quotas = {k: len(strata[k]) * size / total for k in keys}
    alloc = {k: int(math.floor(q)) for k, q in quotas.items()}
    rest = size - sum(alloc.values())
    for k in sorted(keys, key=lambda k: (-(quotas[k] - alloc[k]), k[0] or "", k[1]))[:rest]:
        alloc[k] += 1

    chosen: set[str] = set()
    for k in keys:
        ranked = sorted(strata[k], key=lambda d: _rank_key(seed, d.id))
        chosen.update(d.id for d in ranked[: alloc[k]])

    documents = [d for d in corpus.documents if d.id in chosen]
    logger.info(kv("SUBSAMPLE", corpus=corpus.name, size=len(documents), seed=seed))
    return corpus.model_copy(update={"documents": documents})
