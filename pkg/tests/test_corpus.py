from __future__ import annotations

import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repunct.corpus import (
    ClassCounts,
    CleanDocument,
    ConfigError,
    Dataset,
    IngestError,
    LabeledDocument,
    LabeledWord,
    PunctClass,
    RawDocument,
    SplitConfig,
    dataset_stats,
    extract_labels,
    load_corpus_dir,
    normalize,
    normalize_text,
    read_labeled_tsv,
    split_dataset,
    write_labeled_tsv,
)

E, P, C, Q = PunctClass.EMPTY, PunctClass.PERIOD, PunctClass.COMMA, PunctClass.QUESTION


def norm(text: str) -> str:
    return normalize(RawDocument("d", text)).text


def labeled(text: str) -> LabeledDocument:
    return extract_labels(CleanDocument("d", text))


# ----------------------------------------------------------------- normalize


def test_normalize_exclamation_and_lowercase():
    assert norm("Mörlunda stationer, samt de icke!") == "mörlunda stationer, samt de icke."


def test_normalize_dashes_become_bound_commas():
    assert norm("aldrig - oavsett vad - igen.") == "aldrig, oavsett vad, igen."


def test_normalize_empty():
    assert norm("") == ""


def test_normalize_rejoins_dash_linebreak_words():
    assert norm("lands-\nbygd") == "landsbygd"
    assert norm("lands-\r\nbygd") == "landsbygd"


def test_normalize_character_table():
    assert norm("#rubrik") == "rubrik"
    assert norm("a;b") == "a:b"
    # '"' maps to ',' and the mark then binds left, eating the space.
    assert norm('han sa "hej" till oss.') == "han sa,hej, till oss."


def test_normalize_collapses_mark_runs_to_first():
    assert norm("vad?!") == "vad?"
    assert norm("nej...") == "nej."


text_strategy = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=["Cs"]), max_size=200
)


@given(text_strategy)
@settings(max_examples=300)
def test_normalize_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@given(text_strategy)
@settings(max_examples=300)
def test_normalize_removes_forbidden_characters(text):
    out = normalize_text(text)
    assert not set(out) & set('#;!"')
    # Fixed under lowercasing: every letter with a lowercase counterpart used it.
    assert out == out.lower()
    assert "-\n" not in out


# ------------------------------------------------------------ extract_labels


def test_extract_labels_quoted_sentence():
    doc = labeled("susan, where is the national library?")
    assert doc.sentences == [
        [
            LabeledWord("susan", C),
            LabeledWord("where", E),
            LabeledWord("is", E),
            LabeledWord("the", E),
            LabeledWord("national", E),
            LabeledWord("library", Q),
        ]
    ]
    assert not doc.unterminated


def test_extract_labels_unterminated_flagged():
    doc = labeled("hej")
    assert doc.sentences == [[LabeledWord("hej", E)]]
    assert doc.unterminated


def test_extract_labels_comma_separated():
    doc = labeled("aldrig, oavsett vad, igen.")
    assert doc.sentences == [
        [LabeledWord("aldrig", C), LabeledWord("oavsett", E), LabeledWord("vad", C), LabeledWord("igen", P)]
    ]


def test_extract_labels_drops_orphan_mark_with_warning():
    doc = labeled(", hej.")
    assert doc.sentences == [[LabeledWord("hej", P)]]
    assert len(doc.warnings) == 1
    assert "','" in doc.warnings[0]


def test_extract_labels_colon_is_removed_without_label():
    doc = labeled("han sa: hej.")
    assert doc.sentences == [[LabeledWord("han", E), LabeledWord("sa", E), LabeledWord("hej", P)]]


def test_extract_labels_splits_sentences_at_period_and_question():
    doc = labeled("en två. tre fyra? fem.")
    assert [len(s) for s in doc.sentences] == [2, 2, 1]
    assert [s[-1].label for s in doc.sentences] == [P, Q, P]


def test_labeled_word_validation():
    with pytest.raises(ValueError):
        LabeledWord("", E)
    with pytest.raises(ValueError):
        LabeledWord("hej.", E)


# ------------------------------------------------------------- dataset_stats


def test_stats_by_hand_on_quoted_sentence():
    ds = Dataset([labeled("susan, where is the national library?")])
    assert dataset_stats(ds) == ClassCounts(words=6, period=0, comma=1, question=1, empty=4)


def test_stats_empty_dataset():
    assert dataset_stats(Dataset([])) == ClassCounts(0, 0, 0, 0, 0)


def test_stats_invariant_under_document_reordering():
    docs = [labeled("en två. tre?"), labeled("fyra, fem."), labeled("sex.")]
    forward = dataset_stats(Dataset(docs))
    assert dataset_stats(Dataset(docs[::-1])) == forward
    assert forward.words == forward.period + forward.comma + forward.question + forward.empty


# ------------------------------------------------------------- split_dataset


def _toy_dataset(n_docs: int) -> Dataset:
    return Dataset([LabeledDocument(f"doc{i:03d}", [[LabeledWord("ord", P)]]) for i in range(n_docs)])


def test_split_deterministic_and_disjoint():
    ds = _toy_dataset(50)
    cfg = SplitConfig(train_fraction=0.8, seed=99)
    train1, test1 = split_dataset(ds, cfg)
    train2, test2 = split_dataset(ds, cfg)
    assert [d.id for d in train1.documents] == [d.id for d in train2.documents]
    assert [d.id for d in test1.documents] == [d.id for d in test2.documents]
    ids = [d.id for d in train1.documents] + [d.id for d in test1.documents]
    assert sorted(ids) == [d.id for d in ds.documents]


def test_split_301_documents_gives_241_train():
    train, test = split_dataset(_toy_dataset(301), SplitConfig(train_fraction=0.8, seed=0))
    assert len(train.documents) == 241
    assert len(test.documents) == 60


@given(st.integers(min_value=2, max_value=400), st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=60)
def test_split_size_within_one_of_fraction(n, seed):
    import math

    train, test = split_dataset(_toy_dataset(n), SplitConfig(train_fraction=0.8, seed=seed))
    assert len(train.documents) in {math.floor(0.8 * n), math.ceil(0.8 * n)}
    assert len(train.documents) + len(test.documents) == n


def test_split_single_document_warns(caplog):
    with caplog.at_level(logging.WARNING):
        train, test = split_dataset(_toy_dataset(1), SplitConfig(train_fraction=0.8, seed=3))
    assert len(train.documents) == 1
    assert not test.documents
    assert any("degenerate split" in r.message for r in caplog.records)


def test_split_fraction_validation():
    with pytest.raises(ConfigError):
        SplitConfig(train_fraction=1.0)
    with pytest.raises(ConfigError):
        SplitConfig(train_fraction=0.0)


# ---------------------------------------------------------------------- I/O


def test_labeled_tsv_round_trip(tmp_path):
    doc = labeled("en två. tre fyra? fem")
    path = tmp_path / "d.tsv"
    write_labeled_tsv(doc, path)
    back = read_labeled_tsv(path)
    assert back.sentences == doc.sentences
    assert back.unterminated == doc.unterminated


def test_load_corpus_rejects_invalid_utf8(tmp_path):
    (tmp_path / "bad.txt").write_bytes(b"hej \xff\xfe hopp")
    with pytest.raises(IngestError, match="byte offset 4"):
        load_corpus_dir(tmp_path)


def test_load_corpus_sorted_by_filename(tmp_path):
    (tmp_path / "b.txt").write_text("b.", encoding="utf-8")
    (tmp_path / "a.txt").write_text("a.", encoding="utf-8")
    assert [d.id for d in load_corpus_dir(tmp_path)] == ["a", "b"]
