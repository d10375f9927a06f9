import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairlrf.errors import LabelError, ShapeError
from fairlrf.metrics import (
    CSV_COLUMNS,
    FairnessReport,
    GroupConfusion,
    confusion,
    eodd,
    eopp0,
    eopp1,
    format_table,
    group_prf,
    read_report_csv,
    reports_to_csv,
    tallies_from_row,
)

from oracles import brute_force_metrics, brute_force_tallies

# K=2. Group 1: four class-1 samples, three recognised; group 0: two class-1
# samples, one recognised. Every class-2 sample is recognised.
EOPP_FIXTURE = dict(
    preds=[1, 1, 1, 2, 2, 2, 1, 2, 2, 2, 2, 2],
    labels=[1, 1, 1, 1, 2, 2, 1, 1, 2, 2, 2, 2],
    groups=[1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0],
)


def random_fixture(seed, n, K):
    rng = np.random.default_rng(seed)
    return rng.integers(1, K + 1, n), rng.integers(1, K + 1, n), rng.integers(0, 2, n)


def test_eopp1_hand_fixture():
    c = confusion(EOPP_FIXTURE["preds"], EOPP_FIXTURE["labels"], EOPP_FIXTURE["groups"], 2)
    assert c.tpr()[1].tolist() == [0.75, 1.0]
    assert c.tpr()[0].tolist() == [0.5, 1.0]
    assert eopp1(c) == 0.25


def test_eodd_with_equal_false_positive_rates():
    # tally-level fixture: same TPRs as above, identical FPRs in both groups
    t = np.zeros((2, 2, 4), dtype=np.int64)
    t[1, 0] = [3, 1, 3, 1]  # TP, FP, TN, FN
    t[0, 0] = [1, 1, 3, 1]
    t[1, 1] = [4, 0, 4, 0]
    t[0, 1] = [4, 0, 4, 0]
    c = GroupConfusion(2, t)
    assert c.fpr()[0].tolist() == c.fpr()[1].tolist()
    assert eopp1(c) == 0.25
    assert eodd(c) == 0.25


def test_eodd_realised_three_class_fixture():
    # class-1 misses go to class 3, with equal class-3 negatives in both groups
    preds = [1, 1, 1, 3] + [2, 2] + [1, 3] + [2, 2, 2, 2]
    labels = [1, 1, 1, 1] + [2, 2] + [1, 1] + [2, 2, 2, 2]
    groups = [1] * 6 + [0] * 6
    c = confusion(preds, labels, groups, 3)
    assert eopp1(c) == 0.25
    assert eodd(c) == 0.25


def test_eodd_two_class_fixture_counts_the_forced_fpr_gap():
    # with K=2 a missed class-1 sample is a class-2 false positive, so the
    # TPR gap of class 1 reappears as an FPR gap of class 2
    c = confusion(EOPP_FIXTURE["preds"], EOPP_FIXTURE["labels"], EOPP_FIXTURE["groups"], 2)
    assert eodd(c) == 0.5


def test_single_sample_tally():
    c = confusion([2], [1], [1], 2)
    assert c.tallies[1, 0].tolist() == [0, 0, 0, 1]
    assert c.tallies[1, 1].tolist() == [0, 1, 0, 0]
    assert np.all(c.tallies[0] == 0)


def test_perfect_predictions():
    labels = [1, 2, 3, 1, 2, 3]
    groups = [0, 0, 0, 1, 1, 1]
    c = confusion(labels, labels, groups, 3)
    assert np.all(c.tallies[..., 1] == 0) and np.all(c.tallies[..., 3] == 0)
    prf = group_prf(c)
    assert prf.precision == prf.recall == prf.f1 == (1.0, 1.0)
    assert prf.diff("f1") == 0.0
    assert eopp0(c) == eopp1(c) == eodd(c) == 0.0


def test_maximal_gap():
    labels = [1, 2, 3, 1, 2, 3]
    preds = [2, 3, 1, 1, 2, 3]
    groups = [0, 0, 0, 1, 1, 1]
    c = confusion(preds, labels, groups, 3)
    assert eopp1(c) == 3.0
    prf = group_prf(c)
    assert prf.diff("precision") == prf.diff("recall") == prf.diff("f1") == 1.0


def test_opposite_gaps_cancel_in_eodd():
    t = np.zeros((2, 2, 4), dtype=np.int64)
    t[0, 0] = [3, 3, 7, 2]  # TPR 0.6, FPR 0.3
    t[1, 0] = [4, 1, 9, 1]  # TPR 0.8, FPR 0.1
    t[0, 1] = t[1, 1] = [5, 5, 5, 5]
    c = GroupConfusion(2, t)
    assert eopp1(c) == pytest.approx(0.2)
    assert eodd(c) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(2, 5))
def test_tallies_and_metrics_match_per_sample_oracle(seed, n, K):
    preds, labels, groups = random_fixture(seed, n, K)
    c = confusion(preds, labels, groups, K)
    t = brute_force_tallies(preds, labels, groups, K)
    assert np.array_equal(c.tallies, t)
    ref = brute_force_metrics(t)
    assert eopp0(c) == pytest.approx(ref["eopp0"], abs=1e-12)
    assert eopp1(c) == pytest.approx(ref["eopp1"], abs=1e-12)
    assert eodd(c) == pytest.approx(ref["eodd"], abs=1e-12)
    prf = group_prf(c)
    for m in ("precision", "recall", "f1"):
        assert getattr(prf, m) == pytest.approx(ref[m], abs=1e-12)


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(2, 5))
def test_metric_invariants(seed, n, K):
    preds, labels, groups = random_fixture(seed, n, K)
    c = confusion(preds, labels, groups, K)
    perm = np.random.default_rng(seed).permutation(n)
    cp = confusion(preds[perm], labels[perm], groups[perm], K)
    assert np.array_equal(c.tallies, cp.tallies)
    swapped = confusion(preds, labels, 1 - groups, K)
    for f in (eopp0, eopp1, eodd):
        assert f(swapped) == pytest.approx(f(c), abs=1e-12)
    a, b = group_prf(c), group_prf(swapped)
    assert a.precision == b.precision[::-1] and a.recall == b.recall[::-1] and a.f1 == b.f1[::-1]
    fpr = c.fpr()
    assert eodd(c) <= eopp1(c) + np.sum(np.abs(fpr[1] - fpr[0])) + 1e-12
    assert 0 <= eopp0(c) <= K and 0 <= eopp1(c) <= K and 0 <= eodd(c) <= 2 * K


def test_zero_denominators_are_flagged():
    c = confusion([1, 1], [1, 1], [0, 1], 2)
    assert c.tpr()[0, 1] == 0.0
    assert (0, 2, "tpr") in c.zero_division and (0, 2, "precision") in c.zero_division
    assert c.tnr()[0, 0] == 0.0 and (0, 1, "tnr") in c.zero_division


def test_input_validation():
    with pytest.raises(ShapeError):
        confusion([1, 2], [1], [0, 1], 2)
    with pytest.raises(LabelError):
        confusion([0], [1], [0], 2)
    with pytest.raises(LabelError):
        confusion([1], [3], [0], 2)
    with pytest.raises(LabelError):
        confusion([1], [1], [2], 2)


def test_report_csv_round_trip():
    preds, labels, groups = random_fixture(3, 50, 3)
    c = confusion(preds, labels, groups, 3)
    rep = FairnessReport(c, 1.5, {"method": "slr_w", "seed": 3, "k": 2}, validation=c, zeroed_count=4)
    text = reports_to_csv([rep, rep], ["fairlrf test", "config k = 2"])
    assert text.startswith("# fairlrf test\n# config k = 2\n")
    rows = read_report_csv(text)
    assert len(rows) == 2 and list(rows[0]) == CSV_COLUMNS
    again = tallies_from_row(rows[0], 3)
    assert np.array_equal(again.tallies, c.tallies)
    assert float(rows[0]["eopp1"]) == eopp1(again)
    assert float(rows[0]["precision_avg"]) == group_prf(again).avg("precision")


def test_text_table_has_per_group_rows():
    c = confusion([1, 2, 2, 1], [1, 2, 1, 1], [0, 0, 1, 1], 2)
    table = format_table([("Truncated SVD", FairnessReport(c, 2.0))])
    for needle in ("Truncated SVD", "Group 0", "Group 1", "Avg.", "Diff.", "EOpp", "EOdd", "2.000x"):
        assert needle in table
