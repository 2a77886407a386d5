from __future__ import annotations
import html
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Literal, Mapping, Optional

from joblib import Parallel, delayed
from nltk.stem import PorterStemmer

from app.errors import ConfigError
from app.logging_setup import kv
from app.models.documents import Corpus, Document, TokenStream

logger = logging.getLogger(__name__)

RESOURCES_DIR = Path(__file__).resolve().parent / "resources"
STOPWORDS_PATH = RESOURCES_DIR / "stopwords.txt"
ABBREVIATIONS_PATH = RESOURCES_DIR / "abbreviations.tsv"
LEMMAS_PATH = RESOURCES_DIR / "lemmas.tsv"

Reducer = Literal["none", "stem", "lemmatize"]

# Целые теги (<br />, <i>) и хвосты разметки, оставшиеся после разбиения по пробелам
MARKUP_TAG_RE = re.compile(r"<\s*/?\s*[a-zA-Z][^<>]*>")
MARKUP_REMNANT_RE = re.compile(r"^(?:/?>)*<\s*/?[a-zA-Z]+|^/?>$|^&[a-zA-Z]+;?$")


# ================================
#     РЕСУРСЫ
# ================================

def load_word_list(path: str | Path) -> frozenset[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        w = line.strip().lower()
        if w and not w.startswith("#"):
            words.add(w)
    return frozenset(words)


def load_tsv_map(path: str | Path) -> dict[str, str]:
    """Двухколоночный TSV: ключ<TAB>значение. Ключи приводим к нижнему регистру."""
    out: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition("\t")
        key, value = key.strip().lower(), value.strip()
        if key and value:
            out[key] = value
    return out


@dataclass(frozen=True)
class PipelineConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    expand_abbreviations: bool = True
    numbers_to_words: bool = False
    stopword_list: frozenset[str] = frozenset()
    reducer: Reducer = "stem"
    abbreviations: Mapping[str, str] = field(default_factory=dict)
    lemmas: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = [w for w in self.stopword_list if w != w.lower()]
        if bad:
            raise ValueError(f"stopword_list entries must be lowercase: {sorted(bad)[:5]}")

    @cached_property
    def emoticons(self) -> frozenset[str]:
        # ключи таблицы сокращений со знаками по краям (":)", ":d", "<3")
        return frozenset(k for k in self.abbreviations if _strip_edges(k) != k)

    @staticmethod
    def from_files(
        *,
        stopwords_path: Optional[str | Path] = None,
        abbreviations_path: Optional[str | Path] = None,
        lemmas_path: Optional[str | Path] = None,
        use_stopwords: bool = True,
        **flags,
    ) -> "PipelineConfig":
        try:
            stopwords = load_word_list(stopwords_path or STOPWORDS_PATH) if use_stopwords else frozenset()
            abbreviations = load_tsv_map(abbreviations_path or ABBREVIATIONS_PATH)
            lemmas = load_tsv_map(lemmas_path or LEMMAS_PATH)
        except (OSError, UnicodeError) as e:
            raise ConfigError(f"Cannot read preprocessing resource: {e}") from e
        return PipelineConfig(stopword_list=stopwords, abbreviations=abbreviations, lemmas=lemmas, **flags)

    @staticmethod
    def default() -> "PipelineConfig":
        return _default_config()


@lru_cache(maxsize=1)
def _default_config() -> PipelineConfig:
    return PipelineConfig.from_files()


# ================================
#     ЭТАПЫ
# ================================

def _is_punct(ch: str) -> bool:
    # пунктуация, символы (в т.ч. эмодзи) и управляющие
    return unicodedata.category(ch)[0] in "PSC"


def _strip_edges(piece: str) -> str:
    start, end = 0, len(piece)
    while start < end and _is_punct(piece[start]):
        start += 1
    while end > start and _is_punct(piece[end - 1]):
        end -= 1
    return piece[start:end]


def tokenize(text: str, protected: Optional[Iterable[str]] = None) -> list[str]:
    """
    Разбиение по пробельным символам Unicode, затем срезаем пунктуацию по краям.
    Смайлики из `protected` (по умолчанию из таблицы сокращений) оставляем как есть.
    """
    if not text:
        return []
    keep = frozenset(protected) if protected is not None else PipelineConfig.default().emoticons
    text = MARKUP_TAG_RE.sub(" ", html.unescape(text))
    out: list[str] = []
    for piece in text.split():
        if piece.lower() in keep:
            out.append(piece)
            continue
        stripped = _strip_edges(piece)
        if stripped:
            out.append(stripped)
    return out


_ONES = ("zero one two three four five six seven eight nine ten eleven twelve thirteen "
         "fourteen fifteen sixteen seventeen eighteen nineteen").split()
_TENS = "_ _ twenty thirty forty fifty sixty seventy eighty ninety".split()
_SCALES = ((10**9, "billion"), (10**6, "million"), (1000, "thousand"), (100, "hundred"))


def number_to_words(digits: str) -> list[str]:
    """'2010' -> ['two', 'thousand', 'ten']; длинные последовательности по цифрам."""
    if len(digits) > 12:
        return [_ONES[int(d)] for d in digits]
    n = int(digits)
    if n < 20:
        return [_ONES[n]]
    if n < 100:
        tens, ones = divmod(n, 10)
        return [_TENS[tens] if not ones else f"{_TENS[tens]}-{_ONES[ones]}"]
    for scale, name in _SCALES:
        if n >= scale:
            head, rest = divmod(n, scale)
            words = number_to_words(str(head)) + [name]
            return words + (number_to_words(str(rest)) if rest else [])
    return []  # недостижимо


def normalize(tokens: list[str], config: PipelineConfig) -> list[str]:
    out: list[str] = []
    for tok in tokens:
        if config.lowercase:
            tok = tok.lower()
        pieces = [tok]
        if config.expand_abbreviations:
            expansion = config.abbreviations.get(tok.lower())
            if expansion is not None:
                pieces = expansion.split()
        for piece in pieces:
            if config.strip_punctuation:
                piece = "".join(ch for ch in piece if not _is_punct(ch))
            if config.numbers_to_words and piece.isdigit() and piece.isascii():
                out.extend(number_to_words(piece))
                continue
            if piece:
                out.append(piece)
    return out


_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)

# Длиннее не стеммим: на длинных цепочках "y" стеммер уходит в глубокую рекурсию
MAX_STEM_LEN = 64


@lru_cache(maxsize=500_000)
def stem(token: str) -> str:
    """Porter (оригинальный алгоритм). Пустой результат не возвращаем."""
    if len(token) > MAX_STEM_LEN:
        return token
    result = _stemmer.stem(token)
    return result or token


def lemmatize(token: str, lemmas: Optional[Mapping[str, str]] = None) -> str:
    table = PipelineConfig.default().lemmas if lemmas is None else lemmas
    return table.get(token, token)


def remove_stopwords(tokens: list[str], stopword_list: Iterable[str]) -> list[str]:
    stop = stopword_list if isinstance(stopword_list, (set, frozenset)) else set(stopword_list)
    return [t for t in tokens if t not in stop]


def _is_noise(tok: str) -> bool:
    if all(_is_punct(ch) for ch in tok):
        return True
    if tok.isdigit():
        return True
    return bool(MARKUP_REMNANT_RE.match(tok))


def remove_noise(stream: TokenStream) -> TokenStream:
    """Выкидываем чистую пунктуацию, чистые цифры и остатки разметки; позиции перенумеровываются."""
    return TokenStream(doc_id=stream.doc_id, words=tuple(w for w in stream.words if not _is_noise(w)))


def reduce_tokens(tokens: list[str], config: PipelineConfig) -> list[str]:
    if config.reducer == "stem":
        return [stem(t) for t in tokens]
    if config.reducer == "lemmatize":
        return [lemmatize(t, config.lemmas) for t in tokens]
    return tokens


def run_pipeline(doc: Document, config: PipelineConfig) -> TokenStream:
    """tokenize -> normalize -> remove_stopwords -> stem|lemmatize -> remove_noise."""
    tokens = tokenize(doc.text, protected=config.emoticons)
    tokens = normalize(tokens, config)
    tokens = remove_stopwords(tokens, config.stopword_list)
    tokens = reduce_tokens(tokens, config)
    return remove_noise(TokenStream(doc_id=doc.id, words=tuple(tokens)))


def _run_batch(docs: list[Document], config: PipelineConfig) -> list[TokenStream]:
    return [run_pipeline(d, config) for d in docs]


def preprocess_corpus(corpus: Corpus, config: PipelineConfig, n_jobs: int = 1) -> list[TokenStream]:
    """Конвейер по всем документам; при n_jobs != 1 пачками через joblib, порядок тот же."""
    docs = corpus.documents
    if n_jobs == 1 or len(docs) < 1000:
        streams = _run_batch(docs, config)
    else:
        size = 500
        batches = [docs[i:i + size] for i in range(0, len(docs), size)]
        parts = Parallel(n_jobs=n_jobs)(delayed(_run_batch)(b, config) for b in batches)
        streams = [s for part in parts for s in part]

    empty = sum(1 for s in streams if not s.words)
    logger.info(kv("PREPROCESS", corpus=corpus.name, docs=len(streams), empty=empty, reducer=config.reducer))
    return streams
