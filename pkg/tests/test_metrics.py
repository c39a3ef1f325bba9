import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairabm.metrics import (
    PerformanceReport,
    composite_scores,
    fairness_from_rates,
    fairness_metrics,
    group_disaggregate,
    log_loss,
    min_ranks,
    performance_metrics,
    rank_variants,
    roc_auc,
)


def pairwise_auc(y, s):
    """O(n^2) oracle: fraction of (positive, negative) pairs ordered correctly, ties half."""
    pos = [si for si, yi in zip(s, y) if yi == 1]
    neg = [si for si, yi in zip(s, y) if yi == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


# --- performance ----------------------------------------------------------------------------------


def test_perfect_predictions():
    y = np.array([0, 1, 1, 0, 1])
    r = performance_metrics(y.astype(float), y)
    assert (r.accuracy, r.precision, r.recall, r.roc_auc) == (1.0, 1.0, 1.0, 1.0)
    assert r.log_loss == pytest.approx(0.0, abs=1e-12)


def test_constant_half_has_log_loss_ln2():
    y = np.array([0, 1, 1, 0, 1, 1])
    assert log_loss(y, np.full(6, 0.5)) == pytest.approx(math.log(2), abs=1e-15)
    assert roc_auc(y, np.full(6, 0.5)) == 0.5


def test_auc_single_class_is_undefined():
    assert roc_auc([1, 1, 1], [0.1, 0.5, 0.9]) is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 10)), min_size=2, max_size=200))
def test_auc_matches_pairwise_oracle(data):
    y = [d[0] for d in data]
    s = [d[1] / 10 for d in data]
    if len(set(y)) < 2:
        assert roc_auc(y, s) is None
    else:
        assert roc_auc(y, s) == pytest.approx(pairwise_auc(y, s), abs=1e-12)


def test_group_disaggregation_on_eight_rows():
    probs = np.array([0.9, 0.8, 0.3, 0.6, 0.2, 0.7, 0.1, 0.4])
    labels = np.array([1, 1, 0, 0, 0, 0, 0, 0])
    groups = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    r = group_disaggregate(probs, labels, groups)
    a, b = r.groups["A"], r.groups["B"]
    assert (a.n, b.n) == (4, 4)
    # group A: predictions 1,1,0,1 vs labels 1,1,0,0
    assert a.accuracy == 0.75 and a.precision == pytest.approx(2 / 3) and a.recall == 1.0
    assert a.roc_auc == 1.0
    # group B has no positives: recall falls back to zero and AUC is undefined
    assert b.recall == 0.0 and b.roc_auc is None and b.accuracy == 0.75
    assert r.accuracy == 0.75 and r.n == 8
    d = r.to_dict()
    assert d["groups"]["B"]["roc_auc"] is None


def test_missing_group_is_none():
    r = group_disaggregate([0.2, 0.8], [0, 1], [0, 0])
    assert r.groups["B"] is None


# --- fairness -------------------------------------------------------------------------------------


def test_fairness_from_reference_rates():
    f = fairness_from_rates(0.718, 0.055, 0.863, 0.483)
    assert f.spd == pytest.approx(-0.663, abs=1e-12)
    assert f.eod == pytest.approx(-0.380, abs=1e-12)


def test_fairness_metrics_arithmetic():
    preds = np.array([1, 1, 0, 1, 0, 0, 1, 0])
    labels = np.array([1, 1, 0, 0, 1, 0, 1, 1])
    groups = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    f = fairness_metrics(preds, labels, groups)
    assert f.approval_rate == {"A": 0.75, "B": 0.25}
    assert f.spd == -0.5
    assert f.tpr == {"A": 1.0, "B": pytest.approx(1 / 3)}
    assert f.eod == pytest.approx(1 / 3 - 1)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)), min_size=4, max_size=60))
def test_fairness_is_antisymmetric_under_group_swap(rows):
    preds, labels, groups = (np.array(c) for c in zip(*rows))
    if len(set(groups.tolist())) < 2:
        return
    f = fairness_metrics(preds, labels, groups)
    s = fairness_metrics(preds, labels, 1 - groups)
    assert s.spd == pytest.approx(-f.spd, abs=1e-15)
    if f.eod is not None:
        assert s.eod == pytest.approx(-f.eod, abs=1e-15)


def test_eod_undefined_when_a_group_has_no_positives():
    f = fairness_metrics([1, 0, 1, 0], [1, 0, 0, 0], [0, 0, 1, 1])
    assert f.eod is None and "eod_undefined" in f.flags


def test_fairness_needs_both_groups():
    with pytest.raises(ValueError):
        fairness_metrics([1, 0], [1, 0], [0, 0])


# --- composite scores and ranks -------------------------------------------------------------------


def perf(acc, ll=0.5):
    return PerformanceReport(accuracy=acc, precision=acc, recall=acc, log_loss=ll, roc_auc=acc, n=100, approval_rate=0.5)


def test_dominating_variant_gets_best_performance_score():
    reports = {"good": perf(0.9, ll=0.3), "mid": perf(0.7, ll=0.5), "bad": perf(0.5, ll=0.7)}
    fair = {k: fairness_from_rates(0.5, 0.5, 0.5, 0.5) for k in reports}
    cs = composite_scores(reports, fair)
    assert cs.perf["good"] == 1.0 and cs.perf["bad"] == 0.0
    assert cs.perf["good"] > cs.perf["mid"] > cs.perf["bad"]
    assert all(v == 0.0 for v in cs.fair.values())


def test_fairness_score_is_negative_mean_absolute_gap():
    fair = {"x": fairness_from_rates(0.7, 0.1, 0.9, 0.5), "y": fairness_from_rates(0.5, 0.4, 0.6, None)}
    cs = composite_scores({"x": perf(0.8), "y": perf(0.7)}, fair)
    assert cs.fair["x"] == pytest.approx(-(0.6 + 0.4) / 2)
    assert cs.fair["y"] == pytest.approx(-0.1)


def test_min_ranks_share_ties():
    assert min_ranks({"a": 0.5, "b": 0.9, "c": 0.5, "d": 0.1}) == {"a": 2, "b": 1, "c": 2, "d": 4}


def test_rank_counts_with_planted_winners():
    rng = np.random.default_rng(0)
    variants = ["none", "reweight_auto", "reweight_manual", "eg_dp", "eg_eo"]
    per = {}
    for s in range(16):
        accs = {v: 0.6 + 0.05 * rng.random() for v in variants}
        accs["none"] = 0.9  # always best on performance
        gaps = {v: 0.3 + 0.1 * rng.random() for v in variants}
        gaps["eg_dp"] = 0.01  # always best on fairness
        reports = {v: perf(accs[v], ll=1 - accs[v]) for v in variants}
        fair = {v: fairness_from_rates(0.5, 0.5 - gaps[v], 0.5, 0.5 - gaps[v]) for v in variants}
        per[f"s{s}"] = composite_scores(reports, fair)
    table = rank_variants(per)
    assert table.counts["none"]["perf_1st"] == 16
    assert table.counts["eg_dp"]["fair_1st"] == 16
    assert sum(c["perf_1st"] for c in table.counts.values()) == 16
    assert {r["variant"] for r in table.to_rows()} == set(variants)


def test_ranks_invariant_under_monotone_rescaling():
    accs = {"a": 0.61, "b": 0.74, "c": 0.68}
    base = composite_scores({k: perf(v) for k, v in accs.items()}, {k: fairness_from_rates(0.5, 0.5) for k in accs})
    scaled = composite_scores({k: perf(v**3) for k, v in accs.items()}, {k: fairness_from_rates(0.5, 0.5) for k in accs})
    assert min_ranks(base.perf) == min_ranks(scaled.perf)


def test_ranking_a_single_variant_is_rejected():
    cs = composite_scores({"a": perf(0.7)}, {"a": fairness_from_rates(0.5, 0.5)})
    assert cs.degenerate
    with pytest.raises(ValueError):
        rank_variants({"s": cs})


def test_every_permutation_of_distinct_scores_gets_distinct_ranks():
    for perm in itertools.permutations([0.1, 0.2, 0.3]):
        ranks = min_ranks(dict(zip("abc", perm)))
        assert sorted(ranks.values()) == [1, 2, 3]
