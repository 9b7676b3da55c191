import pytest
from hypothesis import given, strategies as st

from fuhst.metrics import (ConfusionCounts, detection_accuracy, f1, false_ban_rate,
                           global_confusion, per_round_fbr_average, round_confusion,
                           sticky_decisions)


def test_f1_examples():
    assert f1(ConfusionCounts(tp=3)) == 1.0
    assert f1(ConfusionCounts(tp=2, fp=1, fn=1)) == pytest.approx(2 / 3)
    assert f1(ConfusionCounts()) == 0.0


def test_accuracy_examples():
    assert detection_accuracy(ConfusionCounts(tp=2, tn=5)) == 1.0
    assert detection_accuracy(ConfusionCounts(tp=1, tn=8, fp=1)) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        detection_accuracy(ConfusionCounts())


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_accuracy_label_swap_symmetry(tp, fp, tn, fn):
    if tp + fp + tn + fn:
        a = detection_accuracy(ConfusionCounts(tp, fp, tn, fn))
        assert a == detection_accuracy(ConfusionCounts(tn, fn, tp, fp))
        for v in (a, f1(ConfusionCounts(tp, fp, tn, fn))):
            assert 0.0 <= v <= 1.0


def test_fbr_examples():
    assert false_ban_rate(ConfusionCounts(fp=0, tn=4)) == 0.0
    assert false_ban_rate(ConfusionCounts(fp=1, tn=9)) == pytest.approx(0.1)
    assert false_ban_rate(ConfusionCounts(fp=3, tn=3)) == 0.5
    with pytest.raises(ValueError):
        false_ban_rate(ConfusionCounts(tp=1))


def test_global_confusion_one_malicious_ten_rounds():
    decisions = [{j: j == 0 for j in range(10)} for _ in range(10)]
    c = global_confusion(decisions, {0}, rounds=10)
    assert (c.tp, c.fn, c.fp, c.tn) == (10, 0, 0, 90)


def test_never_flagging():
    decisions = [{j: False for j in range(20)} for _ in range(20)]
    c = global_confusion(decisions, {0, 1, 2})
    assert c.fn == 60 and c.tp == 0


def test_perfect_flags_give_f1_one():
    truth = {2, 5}
    decisions = [{j: j in truth for j in range(8)} for _ in range(5)]
    assert f1(global_confusion(decisions, truth)) == 1.0


def test_decisions_must_cover_rounds():
    with pytest.raises(ValueError):
        global_confusion([{}], set(), rounds=2)


def test_sticky_false_ban_average():
    # 3 malicious, 17 benign; benign node 10 flagged once at round 5 of 20
    raw = [{j: (j < 3) or (j == 10 and t == 5) for j in range(20)} for t in range(1, 21)]
    decisions = sticky_decisions(raw)
    expected = (4 * 0 + 16 * (1 / 17)) / 20
    assert per_round_fbr_average(decisions, {0, 1, 2}) == pytest.approx(expected, abs=0, rel=1e-15)


def test_sticky_keeps_banned_nodes_counted():
    raw = [{0: True, 1: False}, {1: False}, {1: False}]
    out = sticky_decisions(raw)
    assert [row.get(0) for row in out] == [True, True, True]


def test_constant_fbr_average():
    decisions = [{j: j in (0, 1) for j in range(10)} for _ in range(7)]
    assert per_round_fbr_average(decisions, set()) == pytest.approx(0.2)
    assert per_round_fbr_average([{j: False for j in range(5)}] * 3, set()) == 0.0


flag_rows = st.lists(st.dictionaries(st.integers(0, 9), st.booleans(), min_size=1), min_size=1, max_size=8)


@given(flag_rows, st.sets(st.integers(0, 9)))
def test_totals_and_ranges(decisions, truth):
    c = global_confusion(decisions, truth)
    assert c.total == sum(len(r) for r in decisions)
    for row in decisions:
        rc = round_confusion(row, truth)
        assert rc.tp + rc.fn == len(truth & set(row))
        assert rc.fp + rc.tn == len(set(row) - truth)
    assert 0.0 <= per_round_fbr_average(decisions, truth) <= 1.0


@given(st.dictionaries(st.integers(0, 9), st.booleans(), min_size=1), st.sets(st.integers(0, 9)),
       st.integers(1, 6))
def test_fbr_conventions_agree_on_constant_rounds(row, truth, rounds):
    decisions = [row] * rounds
    c = global_confusion(decisions, truth)
    if c.fp + c.tn:
        assert per_round_fbr_average(decisions, truth) == pytest.approx(false_ban_rate(c))
