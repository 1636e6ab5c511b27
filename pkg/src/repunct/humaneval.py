"""Human-baseline evaluation: test generation, scoring, cohort aggregation.

Participants receive fixed-size slices of the unpunctuated test-set word
stream, insert '.', ',' and '?' as they read, and their marks are scored
against the gold labels with the same extraction semantics the corpus uses.
Word sequences must match exactly; tampered words are an error, not repaired.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import ClassCounts, Dataset, PunctClass, parse_labeled_text
from .evaluation import CLASS_ORDER, ConfusionMatrix4, EvalReport, confusion, metrics

WORDS_PER_TEST = 650

INSTRUCTIONS = """\
Punctuation task

The attached text has had all punctuation and capital letters removed.
Read it from start to finish and insert periods (.), commas (,) and
question marks (?) wherever you find them appropriate. There is no fixed
number of marks to place; any of the three may or may not occur.

Rules:
  * Only insert the characters '.', ',' and '?'.
  * Do not add, remove, reorder or respell any words.
  * Attach each mark directly to the word before it (e.g. "hej," not "hej ,").
  * The text may start or end mid-sentence; punctuate it as well as you can.

Expect the task to take roughly 10-15 minutes. Return the punctuated text
as a plain text file.
"""


class AnnotationAlignmentError(RuntimeError):
    """The annotated word sequence diverges from the test's word list."""

    def __init__(self, index: int, expected: str, got: str):
        super().__init__(
            f"annotation word {index} is {got!r} but the test word is {expected!r}"
        )
        self.index = index
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class ProvenanceSpan:
    doc_id: str
    word_offset: int
    n_words: int


@dataclass
class HumanTest:
    id: str
    words: list[str]
    gold: list[PunctClass]  # withheld from participants
    provenance: list[ProvenanceSpan]

    def text(self) -> str:
        return " ".join(self.words)


@dataclass(frozen=True)
class AnnotatedReturn:
    test_id: str
    text: str


@dataclass
class ParticipantReport:
    test_id: str
    report: EvalReport
    gold_counts: ClassCounts


def generate_tests(test_set: Dataset, words_per_test: int = WORDS_PER_TEST) -> list[HumanTest]:
    """Cut the test set's word stream into fixed-size slices, in corpus order.

    Cuts fall every ``words_per_test`` words regardless of sentence
    boundaries, so edge sentences may be truncated; a shorter final test
    holds the remainder. Together the tests cover the whole stream with no
    overlaps.
    """
    if not any(test_set.words()):
        raise ValueError("test set is empty")
    stream: list[tuple[str, int, str, PunctClass]] = []
    for doc in test_set.documents:
        for offset, w in enumerate(doc.words()):
            stream.append((doc.id, offset, w.word, w.label))

    tests = []
    n_tests = math.ceil(len(stream) / words_per_test)
    id_width = max(3, len(str(n_tests)))
    for t in range(n_tests):
        chunk = stream[t * words_per_test : (t + 1) * words_per_test]
        provenance: list[ProvenanceSpan] = []
        for doc_id, offset, _, _ in chunk:
            if provenance and provenance[-1].doc_id == doc_id:
                provenance[-1] = ProvenanceSpan(
                    doc_id, provenance[-1].word_offset, provenance[-1].n_words + 1
                )
            else:
                provenance.append(ProvenanceSpan(doc_id, offset, 1))
        tests.append(
            HumanTest(
                id=f"test_{t + 1:0{id_width}d}",
                words=[w for _, _, w, _ in chunk],
                gold=[lab for _, _, _, lab in chunk],
                provenance=provenance,
            )
        )
    return tests


def _parse_annotation(text: str) -> tuple[list[str], list[PunctClass]]:
    # Same word/mark semantics as corpus label extraction, flattened: only
    # '.', ',', '?' label (':' is consumed); any other character stays part
    # of the word and will fail alignment.
    sentences, _, _ = parse_labeled_text(text.lower())
    words = [w.word for s in sentences for w in s]
    labels = [w.label for s in sentences for w in s]
    return words, labels


def score_annotation(test: HumanTest, ret: AnnotatedReturn) -> ParticipantReport:
    """Score one participant's return against the test's gold labels.

    Whitespace and line breaks in the return are irrelevant; any word-level
    divergence raises ``AnnotationAlignmentError`` for the first bad index.
    """
    words, labels = _parse_annotation(ret.text)
    for i, (expected, got) in enumerate(zip(test.words, words)):
        if expected != got:
            raise AnnotationAlignmentError(i, expected, got)
    if len(words) != len(test.words):
        i = min(len(words), len(test.words))
        missing = "<missing>"
        expected = test.words[i] if i < len(test.words) else missing
        got = words[i] if i < len(words) else missing
        raise AnnotationAlignmentError(i, expected, got)
    matrix = confusion(gold=test.gold, pred=labels)
    return ParticipantReport(
        test_id=test.id,
        report=metrics(matrix),
        gold_counts=ClassCounts.from_labels(test.gold),
    )


@dataclass
class CohortStats:
    n_participants: int
    mean_f1: dict[PunctClass, float]
    stddev_f1: dict[PunctClass, float]  # population standard deviation
    pooled_matrix: ConfusionMatrix4
    pooled_report: EvalReport


def cohort_stats(reports: list[ParticipantReport]) -> CohortStats:
    """Mean and population stddev of per-class F1, plus the pooled matrix."""
    if not reports:
        raise ValueError("need at least one participant report")
    mean_f1 = {}
    stddev_f1 = {}
    for cls in CLASS_ORDER:
        values = [r.report.per_class[cls].f1 for r in reports]
        mean = sum(values) / len(values)
        mean_f1[cls] = mean
        stddev_f1[cls] = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
    pooled = ConfusionMatrix4()
    for r in reports:
        pooled = pooled + r.report.matrix
    return CohortStats(
        n_participants=len(reports),
        mean_f1=mean_f1,
        stddev_f1=stddev_f1,
        pooled_matrix=pooled,
        pooled_report=metrics(pooled),
    )


def format_cohort_table(stats: CohortStats) -> str:
    lines = [
        f"participants: {stats.n_participants}",
        "",
        f"{'class':<10s} {'mean F1':>9s} {'stddev F1':>10s}",
    ]
    for cls in CLASS_ORDER:
        lines.append(f"{cls.name:<10s} {stats.mean_f1[cls]:>9.4f} {stats.stddev_f1[cls]:>10.4f}")
    lines += ["", "standard deviation is the population form (cohort = full measured group)"]
    return "\n".join(lines) + "\n"


def write_test_files(test: HumanTest, out_dir: str | Path) -> None:
    """Emit the participant text and the experimenter metadata side by side."""
    out = Path(out_dir)
    (out / f"{test.id}.txt").write_text(test.text() + "\n", encoding="utf-8", newline="\n")
    meta = {
        "id": test.id,
        "n_words": len(test.words),
        "words": test.words,
        "gold": [lab.name for lab in test.gold],
        "provenance": [
            {"doc": span.doc_id, "word_offset": span.word_offset, "n_words": span.n_words}
            for span in test.provenance
        ],
    }
    (out / f"{test.id}.meta.json").write_text(
        json.dumps(meta, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def read_test_meta(path: str | Path) -> HumanTest:
    meta = json.loads(Path(path).read_text(encoding="utf-8"))
    return HumanTest(
        id=meta["id"],
        words=list(meta["words"]),
        gold=[PunctClass.from_name(name) for name in meta["gold"]],
        provenance=[
            ProvenanceSpan(p["doc"], p["word_offset"], p["n_words"]) for p in meta["provenance"]
        ],
    )
