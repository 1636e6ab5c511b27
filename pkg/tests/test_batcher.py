from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from repunct.batcher import BatchPlan, group_sentences, mark_trivial_finals, plan_dataset
from repunct.corpus import Dataset, LabeledDocument, LabeledWord, PunctClass

P = PunctClass.PERIOD


def make_sentences(n, words_each=1):
    return [[LabeledWord(f"w{i}_{j}", P) for j in range(words_each)] for i in range(n)]


def oracle_sizes(n: int, seed: int) -> list[int]:
    """Independent replay of the documented draw sequence.

    Contract: repeatedly draw randint(3, 7) from random.Random(seed), take
    min(draw, remaining) sentences while >= 3 remain; a 1-2 sentence
    remainder forms its own short group.
    """
    rng = random.Random(seed)
    sizes = []
    left = n
    while left >= 3:
        k = min(rng.randint(3, 7), left)
        sizes.append(k)
        left -= k
    if left:
        sizes.append(left)
    return sizes


def test_empty_plan():
    plan = group_sentences([], seed=1)
    assert plan.groups == []
    assert mark_trivial_finals(plan) == set()


def test_three_sentences_single_group_every_seed():
    sentences = make_sentences(3)
    for seed in range(25):
        plan = group_sentences(sentences, seed=seed)
        assert [len(g.sentences) for g in plan.groups] == [3]
        assert not plan.groups[0].final_short


def test_twenty_sentences_seed_42_matches_oracle():
    plan = group_sentences(make_sentences(20), seed=42)
    sizes = [len(g.sentences) for g in plan.groups]
    assert sizes == oracle_sizes(20, 42)
    assert sum(sizes) == 20
    assert all(3 <= s <= 7 for s in sizes[:-1])
    assert 1 <= sizes[-1] <= 7


@given(st.integers(min_value=0, max_value=300), st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=120)
def test_partition_invariants(n, seed):
    sentences = make_sentences(n)
    plan = group_sentences(sentences, seed=seed)
    # Flattening reproduces the sentence sequence exactly.
    assert list(plan.sentences()) == sentences
    sizes = [len(g.sentences) for g in plan.groups]
    assert all(3 <= s <= 7 for s in sizes[:-1])
    for group in plan.groups:
        assert group.final_short == (len(group.sentences) < 3)
    assert len(mark_trivial_finals(plan)) == len(plan.groups)


def test_equal_seeds_identical_plans():
    sentences = make_sentences(120)
    a = group_sentences(sentences, seed=7)
    b = group_sentences(sentences, seed=7)
    assert [(g.start, len(g.sentences)) for g in a.groups] == [
        (g.start, len(g.sentences)) for g in b.groups
    ]


def test_different_seeds_differ_over_many_sentences():
    sentences = make_sentences(150)
    a = group_sentences(sentences, seed=1)
    b = group_sentences(sentences, seed=2)
    assert [len(g.sentences) for g in a.groups] != [len(g.sentences) for g in b.groups]


def test_mark_trivial_finals_positions():
    # Two single-word-sentence groups of sizes [3, 4]: last words sit at flat
    # positions 2 and 6.
    from repunct.batcher import CompoundSentence

    sentences = make_sentences(7)
    plan = BatchPlan(
        seed=0,
        groups=[
            CompoundSentence("doc", 0, sentences[:3], 0),
            CompoundSentence("doc", 3, sentences[3:], 1),
        ],
    )
    assert mark_trivial_finals(plan) == {(0, 2), (1, 6)}


def test_mark_trivial_finals_single_group():
    plan = group_sentences(make_sentences(4), seed=5)
    assert len(plan.groups) == 1
    marked = mark_trivial_finals(plan)
    assert marked == {(0, 3)}


def test_plan_dataset_groups_do_not_straddle_documents():
    docs = [
        LabeledDocument("a", make_sentences(9)),
        LabeledDocument("b", make_sentences(5)),
        LabeledDocument("c", make_sentences(2)),
    ]
    plan = plan_dataset(Dataset(docs), seed=11)
    for group in plan.groups:
        assert group.doc_id in {"a", "b", "c"}
    by_doc: dict[str, int] = {}
    for group in plan.groups:
        assert group.start == by_doc.get(group.doc_id, 0)
        by_doc[group.doc_id] = group.start + len(group.sentences)
    assert by_doc == {"a": 9, "b": 5, "c": 2}
    # A whole document shorter than the minimum is its own short group.
    c_groups = [g for g in plan.groups if g.doc_id == "c"]
    assert len(c_groups) == 1 and c_groups[0].final_short


def test_plan_file_round_trip(tmp_path):
    docs = [LabeledDocument("a", make_sentences(12)), LabeledDocument("b", make_sentences(4))]
    ds = Dataset(docs)
    plan = plan_dataset(ds, seed=77)
    path = tmp_path / "plan.tsv"
    plan.save(path)
    assert path.read_text(encoding="utf-8").startswith("# seed=77\n")
    back = BatchPlan.load(path, ds)
    assert back.seed == 77
    assert [(g.doc_id, g.start, len(g.sentences)) for g in back.groups] == [
        (g.doc_id, g.start, len(g.sentences)) for g in plan.groups
    ]
    assert list(back.words()) == list(plan.words())
