#!/usr/bin/env python3
"""Regenerate the bundled toy corpus and its vocabulary.

The corpus is synthetic Swedish-flavored text, punctuation-dense and with
question sentences, sized so every pipeline stage runs in CI. Raw documents
deliberately contain the characters preprocessing has to clean up: headings,
dashes, dash+linebreak word splits, exclamation points, quotes, semicolons
and capital letters. Output is committed; rerun only to change the corpus.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from repunct import corpus  # noqa: E402
from repunct.tokenizer import CONTINUATION_PREFIX, RESERVED_TOKENS, Vocab  # noqa: E402

SEED = 12345
N_DOCS = 5
SENTENCES_PER_DOC = 46

SUBJECTS = [
    "kommunen", "nämnden", "styrelsen", "regionen", "länet", "skolan",
    "biblioteket", "arbetsgruppen", "projektet", "förvaltningen",
    "myndigheten", "enheten", "verksamheten", "ledningen",
]
OBJECTS = [
    "rapporten", "budgeten", "förslaget", "planen", "beslutet", "uppdraget",
    "resultatet", "stödet", "behovet", "målet", "ansvaret", "programmet",
    "underlaget", "yttrandet", "remissen", "insatsen",
]
VERBS = [
    "presenterar", "granskar", "godkänner", "utvecklar", "förbättrar",
    "diskuterar", "avslutar", "påbörjar", "redovisar", "samordnar",
    "prioriterar", "följer upp", "utreder", "beskriver",
]
TAILS = [
    "under året", "inför hösten", "i god tid", "utan dröjsmål", "enligt planen",
    "tillsammans med länet", "för alla invånare", "på kort sikt", "i hela regionen",
    "med stor omsorg", "efter samråd", "vid nästa möte",
]
QUESTION_HEADS = [
    "ökar", "minskar", "räcker", "fungerar", "förändras", "påverkas",
]
HEADINGS = [
    "Verksamheten", "Ekonomi", "Miljö och hälsa", "Utbildning", "Trafik",
    "Bostäder", "Kultur", "Beredskap",
]
EXCLAIM = [
    "Det är viktigt", "Arbetet fortsätter", "Resultatet imponerar",
    "Alla bidrar", "Tempot ökar",
]
QUOTED = ["ett gott exempel", "en tydlig förbättring", "ett viktigt steg"]


def make_sentence(rng: random.Random) -> str:
    roll = rng.random()
    subject = rng.choice(SUBJECTS)
    if roll < 0.08:
        return f"{QUESTION_HEADS[rng.randrange(len(QUESTION_HEADS))]} {rng.choice(OBJECTS)} {rng.choice(TAILS)}?"
    if roll < 0.14:
        return f"{rng.choice(EXCLAIM)}, menar {subject}!"
    if roll < 0.22:
        return (
            f"{subject.capitalize()} kallar detta \"{rng.choice(QUOTED)}\" "
            f"och {rng.choice(VERBS)} {rng.choice(OBJECTS)} {rng.choice(TAILS)}."
        )
    if roll < 0.30:
        return (
            f"{subject.capitalize()} - trots invändningarna - "
            f"{rng.choice(VERBS)} {rng.choice(OBJECTS)} {rng.choice(TAILS)}."
        )
    if roll < 0.38:
        return (
            f"{subject.capitalize()} {rng.choice(VERBS)} {rng.choice(OBJECTS)}; "
            f"därefter {rng.choice(VERBS)} {rng.choice(SUBJECTS)} {rng.choice(OBJECTS)}."
        )
    clauses = rng.randint(1, 3)
    parts = [f"{subject.capitalize()} {rng.choice(VERBS)} {rng.choice(OBJECTS)} {rng.choice(TAILS)}"]
    for _ in range(clauses - 1):
        parts.append(f"och {rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)}")
    if clauses > 1:
        return ", ".join(parts) + "."
    return parts[0] + "."


def make_document(rng: random.Random, doc_index: int) -> str:
    lines = [f"#{rng.choice(HEADINGS)}"]
    for i in range(SENTENCES_PER_DOC):
        sentence = make_sentence(rng)
        if i > 0 and i % 12 == 0:
            lines.append(f"#{rng.choice(HEADINGS)}")
        if rng.random() < 0.15 and " " in sentence:
            # Split one word across a line with a dash, as PDF extraction does.
            words = sentence.split(" ")
            candidates = [k for k, w in enumerate(words) if len(w.strip('.,?!";')) >= 8]
            if candidates:
                k = rng.choice(candidates)
                w = words[k]
                cut = len(w) // 2
                words[k] = f"{w[:cut]}-\n{w[cut:]}"
                sentence = " ".join(words)
        lines.append(sentence)
    return "\n".join(lines) + "\n"


def main() -> None:
    rng = random.Random(SEED)
    toy_dir = ROOT / "src" / "repunct" / "data" / "toy"
    toy_dir.mkdir(parents=True, exist_ok=True)
    for old in toy_dir.glob("*.txt"):
        old.unlink()

    all_words: set[str] = set()
    total_words = 0
    for d in range(N_DOCS):
        raw_text = make_document(rng, d)
        doc_id = f"toydoc_{d + 1}"
        (toy_dir / f"{doc_id}.txt").write_text(raw_text, encoding="utf-8", newline="\n")
        labeled = corpus.extract_labels(corpus.normalize(corpus.RawDocument(doc_id, raw_text)))
        words = [w.word for w in labeled.words()]
        all_words.update(words)
        total_words += len(words)

    # Vocabulary: specials, single chars (UNK-free fallback), short whole
    # words, and 4-gram pieces so long words split into a few pieces.
    chars = sorted({c for w in all_words for c in w})
    tokens = list(RESERVED_TOKENS) + chars + [CONTINUATION_PREFIX + c for c in chars]
    grams: set[str] = set()
    for w in sorted(all_words):
        if len(w) <= 7:
            if len(w) > 1:
                grams.add(w)
        else:
            grams.add(w[:4])
            for start in range(4, len(w), 4):
                piece = w[start : start + 4]
                if len(piece) > 1:
                    grams.add(CONTINUATION_PREFIX + piece)
    tokens += sorted(grams)
    vocab = Vocab.from_tokens(tokens)
    vocab.save(ROOT / "src" / "repunct" / "data" / "toy_vocab.txt")
    print(f"wrote {N_DOCS} documents, {total_words} words, vocab of {len(vocab)} pieces")


if __name__ == "__main__":
    main()
