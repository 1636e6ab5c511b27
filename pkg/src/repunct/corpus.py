"""Corpus ingestion: text normalization, word/label extraction, statistics, splitting.

The pipeline turns raw documents into sequences of (word, label) pairs where the
label names the punctuation mark that follows the word: PERIOD, COMMA, QUESTION
or EMPTY for no mark. Sentences end at PERIOD or QUESTION labels.
"""

from __future__ import annotations

import logging
import math
import random
import re
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)


class IngestError(ValueError):
    """Raised when raw input cannot be decoded or parsed."""


class ConfigError(ValueError):
    """Raised for invalid configuration values."""


class PunctClass(IntEnum):
    """Label id of the punctuation mark following a word."""

    EMPTY = 0
    PERIOD = 1
    COMMA = 2
    QUESTION = 3

    @property
    def mark(self) -> str:
        """The literal character rendered after a word carrying this label."""
        return _CLASS_TO_MARK[self]

    @classmethod
    def from_name(cls, name: str) -> "PunctClass":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown label name: {name!r}") from None


_CLASS_TO_MARK = {
    PunctClass.EMPTY: "",
    PunctClass.PERIOD: ".",
    PunctClass.COMMA: ",",
    PunctClass.QUESTION: "?",
}

# Marks that carry a label; ':' is recognised during extraction but labels nothing.
MARK_TO_CLASS = {".": PunctClass.PERIOD, ",": PunctClass.COMMA, "?": PunctClass.QUESTION}

SENTENCE_FINAL = frozenset({PunctClass.PERIOD, PunctClass.QUESTION})


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str


@dataclass(frozen=True)
class CleanDocument:
    id: str
    text: str


@dataclass(frozen=True)
class LabeledWord:
    """A punctuation-free lowercase word and the label of the mark after it."""

    word: str
    label: PunctClass

    def __post_init__(self) -> None:
        if not self.word:
            raise ValueError("word must be non-empty")
        if any(c in self.word for c in ".,?"):
            raise ValueError(f"word contains punctuation: {self.word!r}")


Sentence = list[LabeledWord]


@dataclass
class LabeledDocument:
    """Sentences extracted from one document, with extraction diagnostics."""

    id: str
    sentences: list[Sentence]
    unterminated: bool = False
    warnings: list[str] = field(default_factory=list)

    def words(self) -> Iterator[LabeledWord]:
        for sentence in self.sentences:
            yield from sentence

    def n_words(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass
class Dataset:
    documents: list[LabeledDocument]

    def sentences(self) -> Iterator[Sentence]:
        for doc in self.documents:
            yield from doc.sentences

    def words(self) -> Iterator[LabeledWord]:
        for doc in self.documents:
            yield from doc.words()

    def n_words(self) -> int:
        return sum(doc.n_words() for doc in self.documents)


@dataclass(frozen=True)
class ClassCounts:
    words: int
    period: int
    comma: int
    question: int
    empty: int

    @classmethod
    def from_labels(cls, labels: Iterable[PunctClass]) -> "ClassCounts":
        tally = {c: 0 for c in PunctClass}
        for label in labels:
            tally[label] += 1
        return cls(
            words=sum(tally.values()),
            period=tally[PunctClass.PERIOD],
            comma=tally[PunctClass.COMMA],
            question=tally[PunctClass.QUESTION],
            empty=tally[PunctClass.EMPTY],
        )

    def to_json_dict(self) -> dict[str, int]:
        return {
            "words": self.words,
            "period": self.period,
            "comma": self.comma,
            "question": self.question,
            "empty": self.empty,
        }

    def format_table(self, n_documents: int | None = None) -> str:
        rows = []
        if n_documents is not None:
            rows.append(("# of documents", n_documents))
        rows += [
            ("# words", self.words),
            ("# PERIOD", self.period),
            ("# COMMA", self.comma),
            ("# QUESTION", self.question),
            ("# EMPTY", self.empty),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value:>10,}" for name, value in rows)


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


_DASH_LINEBREAK = re.compile(r"-\r?\n")
_CHAR_MAP = str.maketrans({"-": ",", ";": ":", "!": ".", '"': ","})
_WS_BEFORE_MARK = re.compile(r"\s+([.,?:])")
_MARK_RUN = re.compile(r"([.,?:])[.,?:]+")


def normalize_text(text: str) -> str:
    """Normalize raw text to the form label extraction expects.

    In order: remove dash+linebreak pairs (rejoining words split across lines),
    delete '#', map '-'->',' / ';'->':' / '!'->'.' / '"'->',', lowercase. Two
    cleanup passes follow: whitespace directly before a mark is removed (so a
    substituted ',' binds to the preceding word) and runs of marks collapse to
    their first mark. Idempotent.
    """
    text = _DASH_LINEBREAK.sub("", text)
    text = text.replace("#", "")
    text = text.translate(_CHAR_MAP)
    text = text.lower()
    text = _WS_BEFORE_MARK.sub(r"\1", text)
    text = _MARK_RUN.sub(r"\1", text)
    return text


def normalize(doc: RawDocument) -> CleanDocument:
    return CleanDocument(id=doc.id, text=normalize_text(doc.text))


def parse_labeled_text(text: str) -> tuple[list[Sentence], list[str], bool]:
    """Split normalized text into sentences of labeled words.

    Each word takes the label of the mark immediately after it; PERIOD and
    QUESTION close the sentence; ':' is consumed without labeling anything.
    A mark with no word to attach to (sentence starts with a mark, or the word
    already carries a mark) is dropped with a structural warning.

    Returns (sentences, warnings, unterminated) where unterminated flags a
    trailing sentence that never received a PERIOD/QUESTION label.
    """
    sentences: list[Sentence] = []
    current: Sentence = []
    warnings: list[str] = []
    # Index into `current` of the last word still eligible for a mark.
    open_word = -1

    def close_sentence() -> None:
        nonlocal current, open_word
        if current:
            sentences.append(current)
        current = []
        open_word = -1

    for chunk in text.split():
        for piece in re.findall(r"[^.,?:]+|[.,?:]", chunk):
            if piece == ":":
                continue
            mark = MARK_TO_CLASS.get(piece)
            if mark is None:
                current.append(LabeledWord(piece, PunctClass.EMPTY))
                open_word = len(current) - 1
                continue
            if open_word < 0:
                warnings.append(f"dropped {piece!r} with no word to attach to")
                continue
            current[open_word] = LabeledWord(current[open_word].word, mark)
            open_word = -1
            if mark in SENTENCE_FINAL:
                close_sentence()

    unterminated = bool(current)
    if unterminated:
        close_sentence()
    return sentences, warnings, unterminated


def extract_labels(doc: CleanDocument) -> LabeledDocument:
    """Extract labeled sentences from a normalized document."""
    sentences, warnings, unterminated = parse_labeled_text(doc.text)
    for message in warnings:
        log.warning("%s: %s", doc.id, message)
    if unterminated:
        log.warning("%s: trailing sentence has no final period/question mark", doc.id)
    return LabeledDocument(id=doc.id, sentences=sentences, unterminated=unterminated, warnings=warnings)


def dataset_stats(ds: Dataset) -> ClassCounts:
    """Per-class label counts over the whole dataset; words equals their sum."""
    return ClassCounts.from_labels(w.label for w in ds.words())


def split_dataset(ds: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    """Split documents whole into train/test, deterministically for a seed.

    Membership comes from a seeded Fisher-Yates shuffle (``random.Random(seed)``)
    of document positions; both splits keep the original document order. The
    train size is ``round(n * train_fraction)``, so it is within one document
    of the requested fraction.
    """
    if not ds.documents:
        raise ValueError("cannot split an empty dataset")
    n = len(ds.documents)
    n_train = int(math.floor(n * cfg.train_fraction + 0.5))
    order = list(range(n))
    random.Random(cfg.seed).shuffle(order)
    train_positions = set(order[:n_train])
    train = Dataset([d for i, d in enumerate(ds.documents) if i in train_positions])
    test = Dataset([d for i, d in enumerate(ds.documents) if i not in train_positions])
    if not train.documents or not test.documents:
        log.warning(
            "degenerate split: %d train / %d test documents", len(train.documents), len(test.documents)
        )
    return train, test


def load_corpus_dir(path: str | Path) -> list[RawDocument]:
    """Read a directory of UTF-8 .txt files; the stem is the document id."""
    directory = Path(path)
    if not directory.is_dir():
        raise IngestError(f"corpus directory not found: {directory}")
    docs = []
    for file in sorted(directory.glob("*.txt")):
        raw = file.read_bytes()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"{file.name}: invalid UTF-8 at byte offset {exc.start}") from exc
        docs.append(RawDocument(id=file.stem, text=text))
    return docs


def write_labeled_tsv(doc: LabeledDocument, path: str | Path) -> None:
    """Write one word<TAB>label row per word, blank line between sentences."""
    lines = []
    for sentence in doc.sentences:
        for w in sentence:
            lines.append(f"{w.word}\t{w.label.name}")
        lines.append("")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8", newline="\n")


def read_labeled_tsv(path: str | Path, doc_id: str | None = None) -> LabeledDocument:
    file = Path(path)
    if doc_id is None:
        doc_id = file.stem
    sentences: list[Sentence] = []
    current: Sentence = []
    for lineno, line in enumerate(file.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        try:
            word, label_name = line.split("\t")
            current.append(LabeledWord(word, PunctClass.from_name(label_name)))
        except ValueError as exc:
            raise IngestError(f"{file.name}:{lineno}: bad TSV row {line!r}") from exc
    if current:
        sentences.append(current)
    unterminated = bool(sentences) and sentences[-1][-1].label not in SENTENCE_FINAL
    return LabeledDocument(id=doc_id, sentences=sentences, unterminated=unterminated)


def load_labeled_dir(path: str | Path) -> Dataset:
    directory = Path(path)
    if not directory.is_dir():
        raise IngestError(f"labeled directory not found: {directory}")
    return Dataset([read_labeled_tsv(f) for f in sorted(directory.glob("*.tsv"))])
