from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repunct.corpus import PunctClass
from repunct.evaluation import (
    CLASS_ORDER,
    ConfusionMatrix4,
    UndefinedMetricsError,
    confusion,
    debias_batch_final,
    empty_balance,
    f1_score,
    format_report_table,
    metrics,
    round1,
)

from conftest import KNOWN_INCONSISTENT_CELL, REFERENCE_RESULTS

E, P, C, Q = PunctClass.EMPTY, PunctClass.PERIOD, PunctClass.COMMA, PunctClass.QUESTION


def pct(report_value: float) -> float:
    return round1(report_value * 100)


# ----------------------------------------------------------------- confusion


def test_confusion_diagonal():
    m = confusion([P], [P])
    assert m.counts[0][0] == 1
    assert m.total() == 1


def test_confusion_double_counts_shifted_period():
    # gold "skiner." + "idag" vs prediction "skiner" + "idag.":
    # one false positive and one false negative for PERIOD.
    gold = [P, E]
    pred = [E, P]
    m = confusion(gold, pred)
    assert m.row_sum(P) - m.tp(P) == 1  # FP
    assert m.col_sum(P) - m.tp(P) == 1  # FN
    assert m.tp(P) == 0


def test_confusion_reproduces_cohort_matrix(human_matrix):
    gold, pred = [], []
    for i, predicted in enumerate(CLASS_ORDER):
        for j, true in enumerate(CLASS_ORDER):
            n = human_matrix.counts[i][j]
            gold += [true] * n
            pred += [predicted] * n
    assert confusion(gold, pred).counts == human_matrix.counts


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        confusion([P], [P, E])


def test_matrix_grid_round_trip(human_matrix):
    grid = human_matrix.format_grid()
    assert ConfusionMatrix4.parse_grid(grid).counts == human_matrix.counts


# ------------------------------------------------------------------- metrics


def test_metrics_human_baseline_row(human_matrix):
    r = metrics(human_matrix)
    assert (pct(r.per_class[P].precision), pct(r.per_class[P].recall), pct(r.per_class[P].f1)) == (
        87.2,
        80.4,
        83.6,
    )
    assert (pct(r.per_class[C].precision), pct(r.per_class[C].recall), pct(r.per_class[C].f1)) == (
        59.8,
        63.3,
        61.5,
    )
    assert (pct(r.per_class[Q].precision), pct(r.per_class[Q].recall), pct(r.per_class[Q].f1)) == (
        100.0,
        100.0,
        100.0,
    )
    assert (pct(r.macro_punct.precision), pct(r.macro_punct.recall), pct(r.macro_punct.f1)) == (
        82.3,
        81.2,
        81.7,
    )


def test_metrics_identity_predictions():
    m = ConfusionMatrix4([[5, 0, 0, 0], [0, 4, 0, 0], [0, 0, 3, 0], [0, 0, 0, 10]])
    r = metrics(m)
    assert r.accuracy == 1.0
    for cls in CLASS_ORDER:
        assert r.per_class[cls].f1 == 1.0


def test_f1_formula_comma_row():
    assert round1(f1_score(79.2, 64.2)) == 70.9


def test_macro_of_published_f1s():
    assert round1((70.9 + 89.7 + 76.0) / 3) == 78.9


def test_reference_results_cross_check():
    # One published cell is internally inconsistent (see
    # KNOWN_INCONSISTENT_CELL); every other F1 cell and every overall cell
    # agrees with recomputation to within one-decimal rounding.
    for system, rows in REFERENCE_RESULTS.items():
        for cls in ("comma", "period", "question"):
            p, r, printed_f1 = rows[cls]
            if (system, cls) == KNOWN_INCONSISTENT_CELL:
                continue
            assert abs(f1_score(p, r) - printed_f1) < 0.1, (system, cls)
        for i, metric in enumerate(("precision", "recall", "f1")):
            mean = sum(rows[cls][i] for cls in ("comma", "period", "question")) / 3
            assert abs(mean - rows["overall"][i]) < 0.1, (system, metric)


def test_known_inconsistent_reference_cell_is_what_we_think():
    # Documents the single typo in the published table: the printed triple
    # (72.4, 79.0, 76.0) has harmonic mean 75.556, not 76.0, while the
    # overall column was averaged from the printed 76.0.
    system, cls = KNOWN_INCONSISTENT_CELL
    p, r, printed_f1 = REFERENCE_RESULTS[system][cls]
    recomputed = f1_score(p, r)
    assert printed_f1 == 76.0
    assert recomputed == pytest.approx(75.556, abs=0.001)
    assert abs(recomputed - printed_f1) > 0.1


def test_metrics_empty_matrix_rejected():
    with pytest.raises(UndefinedMetricsError):
        metrics(ConfusionMatrix4())


def test_metrics_undefined_annotations():
    m = ConfusionMatrix4([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 5]])
    r = metrics(m)
    assert r.per_class[P].precision == 0.0
    assert "precision" in r.per_class[P].undefined
    assert "recall" in r.per_class[C].undefined
    assert "f1" in r.per_class[C].undefined  # both sides undefined
    assert r.per_class[P].undefined == ("precision",)  # recall is defined (0/1)


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=16, max_size=16), st.integers(2, 9))
@settings(max_examples=100)
def test_metrics_scale_consistent(cells, k):
    if sum(cells) == 0:
        cells[0] = 1
    m1 = ConfusionMatrix4([cells[0:4], cells[4:8], cells[8:12], cells[12:16]])
    mk = ConfusionMatrix4([[c * k for c in row] for row in m1.counts])
    r1, rk = metrics(m1), metrics(mk)
    assert rk.accuracy == pytest.approx(r1.accuracy, abs=1e-12)
    for cls in CLASS_ORDER:
        assert rk.per_class[cls].precision == pytest.approx(r1.per_class[cls].precision, abs=1e-12)
        assert rk.per_class[cls].recall == pytest.approx(r1.per_class[cls].recall, abs=1e-12)
        assert rk.per_class[cls].f1 == pytest.approx(r1.per_class[cls].f1, abs=1e-12)


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=16, max_size=16))
@settings(max_examples=100)
def test_matrix_marginal_identities(cells):
    if sum(cells) == 0:
        cells[5] = 2
    m = ConfusionMatrix4([cells[0:4], cells[4:8], cells[8:12], cells[12:16]])
    assert sum(m.tp(c) for c in CLASS_ORDER) == m.trace()
    for cls in CLASS_ORDER:
        i = CLASS_ORDER.index(cls)
        assert m.tp(cls) + (m.row_sum(cls) - m.tp(cls)) == sum(m.counts[i])
        assert m.tp(cls) + (m.col_sum(cls) - m.tp(cls)) == sum(row[i] for row in m.counts)
    assert metrics(m).accuracy == m.trace() / m.total()


# ------------------------------------------------------------- empty_balance


def test_empty_balance_published_sums():
    # EMPTY predicted row off-diagonals (75, 455, 2) -> 532 false positives;
    # EMPTY true column off-diagonals (119, 362, 1) -> 482 false negatives.
    m = ConfusionMatrix4(
        [
            [3000, 10, 0, 119],
            [10, 1200, 0, 362],
            [0, 1, 3, 1],
            [75, 455, 2, 60000],
        ]
    )
    assert empty_balance(m) == (532, 482)


def test_empty_balance_diagonal_only():
    m = ConfusionMatrix4([[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 3, 0], [0, 0, 0, 4]])
    assert empty_balance(m) == (0, 0)


# -------------------------------------------------------- debias_batch_final


def test_debias_published_period_counts():
    # 3772 true-positive periods of which 794 are trivial batch finals;
    # excluding them leaves 2978.
    trivial = set(range(794))
    gold = [P] * 3772 + [E] * 1000
    pred = [P] * 3772 + [E] * 1000
    m = debias_batch_final(gold, pred, trivial)
    assert m.tp(P) == 2978
    assert confusion(gold, pred).tp(P) == 3772


def test_debias_empty_exclusions_is_identity():
    gold = [P, C, E, Q]
    pred = [P, E, E, Q]
    assert debias_batch_final(gold, pred, set()).counts == confusion(gold, pred).counts


def test_debias_all_positions_marked_yields_empty_matrix():
    gold = [P, E]
    pred = [P, E]
    m = debias_batch_final(gold, pred, {0, 1})
    assert m.total() == 0
    with pytest.raises(UndefinedMetricsError):
        metrics(m)


def test_debias_accepts_group_position_pairs():
    gold = [P, P]
    pred = [P, P]
    assert debias_batch_final(gold, pred, {(0, 1)}).tp(P) == 1


def test_debias_position_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        debias_batch_final([P], [P], {5})


@given(
    st.lists(st.sampled_from([E, P, C, Q]), min_size=1, max_size=60),
    st.data(),
)
@settings(max_examples=80)
def test_debias_never_increases_tp(gold, data):
    pred = data.draw(st.lists(st.sampled_from([E, P, C, Q]), min_size=len(gold), max_size=len(gold)))
    excluded = data.draw(st.sets(st.integers(min_value=0, max_value=len(gold) - 1)))
    full = confusion(gold, pred)
    reduced = debias_batch_final(gold, pred, excluded)
    for cls in CLASS_ORDER:
        assert reduced.tp(cls) <= full.tp(cls)


# ---------------------------------------------------------------- formatting


def test_round1_half_away_from_zero():
    assert round1(81.25) == 81.3
    assert round1(81.24) == 81.2
    assert round1(-81.25) == -81.3


def test_report_table_mentions_all_groups(human_matrix):
    table = format_report_table(metrics(human_matrix), "human baseline")
    assert "Comma" in table and "Overall" in table
    assert "83.6" in table and "61.5" in table and "81.7" in table
