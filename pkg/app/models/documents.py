# app/models/documents.py
from __future__ import annotations
from dataclasses import dataclass
from typing import Iterator, List, Literal, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SplitName = Literal["train", "test"]
DatasetName = Literal["imdb", "alexa"]

# Порядок классов фиксирован: id 0 = negative, id 1 = positive
CLASS_NAMES: tuple[str, str] = ("negative", "positive")


class Document(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    text: str
    label: str
    split: Optional[SplitName] = None

    @field_validator("text")
    @classmethod
    def _text_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("document text must be non-empty")
        return v


class LoadReport(BaseModel):
    """Счётчики загрузки: сколько прочитали, сколько отбросили и почему."""

    model_config = ConfigDict(frozen=True)

    dataset: str
    loaded: int = 0
    dropped_missing: int = 0
    invalid_label: int = 0
    undecodable: int = 0


class Corpus(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    documents: List[Document] = Field(default_factory=list)
    class_names: List[str] = Field(default_factory=lambda: list(CLASS_NAMES))
    load_report: Optional[LoadReport] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "Corpus":
        if len(self.class_names) != 2:
            raise ValueError(f"corpus {self.name!r} must have exactly 2 classes, got {self.class_names}")
        seen: set[str] = set()
        allowed = set(self.class_names)
        for d in self.documents:
            if d.id in seen:
                raise ValueError(f"duplicate document id {d.id!r} in corpus {self.name!r}")
            seen.add(d.id)
            if d.label not in allowed:
                raise ValueError(f"label {d.label!r} of {d.id!r} not in {self.class_names}")
        return self

    def label_ids(self, documents: Optional[List[Document]] = None) -> list[int]:
        docs = self.documents if documents is None else documents
        index = {name: i for i, name in enumerate(self.class_names)}
        return [index[d.label] for d in docs]

    def in_split(self, split: SplitName) -> list[Document]:
        return [d for d in self.documents if d.split == split]

    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.class_names}
        for d in self.documents:
            counts[d.label] += 1
        return counts


# --- Токены ---

class Token(NamedTuple):
    surface: str
    position: int


@dataclass(frozen=True)
class TokenStream:
    """
    Токены одного документа после конвейера предобработки.
    Позиции плотные (0..n-1), поэтому храним только поверхностные формы.
    """

    doc_id: str
    words: tuple[str, ...] = ()

    @property
    def tokens(self) -> list[Token]:
        return [Token(w, i) for i, w in enumerate(self.words)]

    def __iter__(self) -> Iterator[str]:
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)
