"""Grouping consecutive sentences into compound sentences of 3-7.

Group sizes are drawn from a seeded generator so plans are reproducible; the
plan file is the ground-truth record of a run's grouping. Because every group
ends at a sentence boundary, the last word of each group trivially precedes a
period; ``mark_trivial_finals`` locates those positions for bias correction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .corpus import Dataset, IngestError, LabeledWord, Sentence

MIN_GROUP = 3
MAX_GROUP = 7


@dataclass
class CompoundSentence:
    doc_id: str
    start: int  # sentence index within the document
    sentences: list[Sentence]
    index: int  # position within the plan
    final_short: bool = False

    def words(self) -> list[LabeledWord]:
        return [w for s in self.sentences for w in s]

    def n_words(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass
class BatchPlan:
    seed: int
    groups: list[CompoundSentence]

    def sentences(self) -> Iterator[Sentence]:
        for group in self.groups:
            yield from group.sentences

    def words(self) -> Iterator[LabeledWord]:
        for group in self.groups:
            yield from group.words()

    def save(self, path: str | Path) -> None:
        lines = [f"# seed={self.seed}"]
        for g in self.groups:
            lines.append(f"{g.doc_id}\t{g.start}\t{len(g.sentences)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: str | Path, dataset: Dataset) -> "BatchPlan":
        """Rebuild a plan against the dataset it was computed from."""
        file = Path(path)
        lines = file.read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("# seed="):
            raise IngestError(f"{file.name}: missing '# seed=' header")
        seed = int(lines[0].removeprefix("# seed="))
        by_id = {doc.id: doc for doc in dataset.documents}
        groups: list[CompoundSentence] = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                doc_id, start_s, size_s = line.split("\t")
                start, size = int(start_s), int(size_s)
            except ValueError as exc:
                raise IngestError(f"{file.name}:{lineno}: bad plan row {line!r}") from exc
            doc = by_id.get(doc_id)
            if doc is None or start + size > len(doc.sentences):
                raise IngestError(f"{file.name}:{lineno}: plan row does not match dataset")
            sentences = doc.sentences[start : start + size]
            groups.append(
                CompoundSentence(
                    doc_id=doc_id,
                    start=start,
                    sentences=sentences,
                    index=len(groups),
                    final_short=size < MIN_GROUP,
                )
            )
        return cls(seed=seed, groups=groups)


def _draw_sizes(n: int, rng: random.Random) -> list[tuple[int, bool]]:
    """Partition n sentences into (size, short_flag) runs.

    Each draw is ``rng.randint(3, 7)``; a draw larger than the remainder takes
    whatever is left, and a trailing remainder of 1-2 sentences becomes a
    short flagged group.
    """
    sizes: list[tuple[int, bool]] = []
    taken = 0
    while n - taken >= MIN_GROUP:
        k = min(rng.randint(MIN_GROUP, MAX_GROUP), n - taken)
        sizes.append((k, False))
        taken += k
    if taken < n:
        sizes.append((n - taken, True))
    return sizes


def group_sentences(sentences: list[Sentence], seed: int, doc_id: str = "doc") -> BatchPlan:
    """Group one document-ordered sentence list into compound sentences."""
    rng = random.Random(seed)
    plan = BatchPlan(seed=seed, groups=[])
    _extend_plan(plan, sentences, doc_id, rng)
    return plan


def plan_dataset(ds: Dataset, seed: int) -> BatchPlan:
    """Group every document of a dataset, one draw stream across documents.

    Groups never straddle documents; each document's trailing 1-2 sentences
    form their own short flagged group.
    """
    rng = random.Random(seed)
    plan = BatchPlan(seed=seed, groups=[])
    for doc in ds.documents:
        _extend_plan(plan, doc.sentences, doc.id, rng)
    return plan


def _extend_plan(plan: BatchPlan, sentences: list[Sentence], doc_id: str, rng: random.Random) -> None:
    start = 0
    for size, short in _draw_sizes(len(sentences), rng):
        plan.groups.append(
            CompoundSentence(
                doc_id=doc_id,
                start=start,
                sentences=sentences[start : start + size],
                index=len(plan.groups),
                final_short=short,
            )
        )
        start += size


def mark_trivial_finals(plan: BatchPlan) -> set[tuple[int, int]]:
    """Positions whose PERIOD label is trivially predictable from batching.

    Returns (group index, word position) pairs where the position indexes the
    plan's flattened word stream; there is exactly one per group (its last
    word, the one right before the separator token).
    """
    marked: set[tuple[int, int]] = set()
    offset = 0
    for gi, group in enumerate(plan.groups):
        n = group.n_words()
        marked.add((gi, offset + n - 1))
        offset += n
    return marked
