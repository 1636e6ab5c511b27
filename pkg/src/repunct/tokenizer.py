"""Sub-word tokenization and sequence encoding.

Words are segmented greedily against a plain-text vocabulary (longest matching
piece first, continuation pieces carry a "##" prefix). Encoded sequences frame
the pieces with [CLS]/[SEP], pad to a fixed length, and align labels so that
only each word's root piece carries the label; everything else is masked with
-100 and excluded from loss and scoring.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import LabeledWord, PunctClass

CLS = "[CLS]"
SEP = "[SEP]"
PAD = "[PAD]"
UNK = "[UNK]"
MASK_LABEL = -100
CONTINUATION_PREFIX = "##"

RESERVED_TOKENS = (PAD, UNK, CLS, SEP)

DEFAULT_MAX_LEN = 512


@dataclass(frozen=True)
class TokenPiece:
    text: str
    id: int

    @property
    def is_continuation(self) -> bool:
        return self.text.startswith(CONTINUATION_PREFIX)


class Vocab:
    """Immutable piece->id map with the four reserved tokens."""

    def __init__(self, pieces: dict[str, int]):
        for token in RESERVED_TOKENS:
            if token not in pieces:
                raise ValueError(f"vocabulary is missing reserved token {token}")
        if any(not piece for piece in pieces):
            raise ValueError("vocabulary contains an empty piece")
        reserved_ids = [pieces[t] for t in RESERVED_TOKENS]
        if len(set(reserved_ids)) != len(reserved_ids):
            raise ValueError("reserved token ids must be distinct")
        self._pieces = dict(pieces)
        self.pad_id = pieces[PAD]
        self.unk_id = pieces[UNK]
        self.cls_id = pieces[CLS]
        self.sep_id = pieces[SEP]

    def __contains__(self, piece: str) -> bool:
        return piece in self._pieces

    def __len__(self) -> int:
        return len(self._pieces)

    def id_of(self, piece: str) -> int:
        return self._pieces[piece]

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocab":
        """Build from an ordered token list; position = id."""
        pieces: dict[str, int] = {}
        for i, token in enumerate(tokens):
            if token in pieces:
                raise ValueError(f"duplicate vocabulary piece {token!r}")
            pieces[token] = i
        return cls(pieces)

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocab":
        """Load a one-piece-per-line UTF-8 vocab file; line number = id."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls.from_tokens(line for line in lines if line)

    def save(self, path: str | Path) -> None:
        ordered = sorted(self._pieces.items(), key=lambda kv: kv[1])
        Path(path).write_text("\n".join(p for p, _ in ordered) + "\n", encoding="utf-8", newline="\n")


def build_vocab(words: Iterable[str], max_whole_word_len: int | None = None) -> Vocab:
    """Assemble a test/toy vocabulary covering the given words.

    Includes every single character (plus its continuation form) so greedy
    matching never falls back to UNK, and whole words up to the optional
    length cutoff; longer words segment into pieces.
    """
    words = sorted(set(words))
    chars = sorted({c for w in words for c in w})
    tokens = list(RESERVED_TOKENS)
    tokens += chars
    tokens += [CONTINUATION_PREFIX + c for c in chars]
    for w in words:
        if (max_whole_word_len is None or len(w) <= max_whole_word_len) and len(w) > 1:
            tokens.append(w)
    return Vocab.from_tokens(tokens)


def wordpiece_tokenize(word: str, vocab: Vocab) -> list[TokenPiece]:
    """Greedy longest-match-first segmentation of one normalized word.

    Pieces after the first are matched with "##" prepended. If no piece
    matches at any point the whole word becomes a single UNK.
    """
    if not word:
        raise ValueError("cannot tokenize an empty word")
    pieces: list[TokenPiece] = []
    start = 0
    while start < len(word):
        end = len(word)
        found = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION_PREFIX + candidate
            if candidate in vocab:
                found = candidate
                break
            end -= 1
        if found is None:
            return [TokenPiece(UNK, vocab.unk_id)]
        pieces.append(TokenPiece(found, vocab.id_of(found)))
        start = end
    return pieces


@dataclass
class EncodedSequence:
    """Fixed-length model input with label alignment.

    ``labels`` holds the word's label id at each root piece and -100 at
    continuation pieces, [CLS], [SEP] and padding. ``word_starts`` indexes the
    root pieces in input order.
    """

    ids: list[int]
    pieces: list[str]
    labels: list[int]
    attention_mask: list[int]
    word_starts: list[int]

    def __len__(self) -> int:
        return len(self.ids)


def encode_compound(
    words: Sequence[LabeledWord], vocab: Vocab, max_len: int = DEFAULT_MAX_LEN
) -> EncodedSequence | None:
    """Encode whole sentences' words as [CLS] pieces [SEP] padding.

    Returns None when the pieces plus the two special tokens would exceed
    ``max_len``: oversized compounds are dropped rather than truncated
    mid-word.
    """
    if not words:
        raise ValueError("cannot encode an empty word list")
    per_word = [wordpiece_tokenize(w.word, vocab) for w in words]
    total = sum(len(p) for p in per_word)
    if total + 2 > max_len:
        return None

    ids = [vocab.cls_id]
    pieces = [CLS]
    labels = [MASK_LABEL]
    word_starts = []
    for w, wp in zip(words, per_word):
        word_starts.append(len(ids))
        for j, piece in enumerate(wp):
            ids.append(piece.id)
            pieces.append(piece.text)
            labels.append(int(w.label) if j == 0 else MASK_LABEL)
    ids.append(vocab.sep_id)
    pieces.append(SEP)
    labels.append(MASK_LABEL)

    mask = [1] * len(ids)
    padding = max_len - len(ids)
    ids += [vocab.pad_id] * padding
    pieces += [PAD] * padding
    labels += [MASK_LABEL] * padding
    mask += [0] * padding
    return EncodedSequence(ids=ids, pieces=pieces, labels=labels, attention_mask=mask, word_starts=word_starts)


def apply_tags(words: Sequence[str], tags: Sequence[PunctClass]) -> str:
    """Render words and tags back to punctuated text (inverse of extraction).

    Words join with single spaces; each mark binds to its word with no space.
    """
    if len(words) != len(tags):
        raise ValueError(f"{len(words)} words but {len(tags)} tags")
    return " ".join(w + t.mark for w, t in zip(words, tags))


def dump_encoded_tsv(seq: EncodedSequence) -> str:
    """Debug dump: piece, id, label, mask columns."""
    lines = ["piece\tid\tlabel\tmask"]
    for piece, id_, label, mask in zip(seq.pieces, seq.ids, seq.labels, seq.attention_mask):
        lines.append(f"{piece}\t{id_}\t{label}\t{mask}")
    return "\n".join(lines) + "\n"
