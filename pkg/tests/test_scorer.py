"""Closure-based scoring, F computation, and aggregation."""

import random

import pytest

from corefbench.chains import ALL_PAIRS, CONSECUTIVE, ChainPartition, LinkSet
from corefbench.scorer import (
    DEFAULT_BETAS,
    MACRO,
    MICRO,
    ScoreError,
    ScoreReport,
    aggregate,
    f_measure,
    recall_precision_items,
    report_from_record,
    report_to_record,
    score_document,
)


def make_report(recall, precision, counts, betas=DEFAULT_BETAS, **flags):
    return ScoreReport(
        recall=recall,
        precision=precision,
        f_measures={b: f_measure(recall, precision, b) for b in betas},
        key_links=counts[0],
        key_links_recovered=counts[1],
        response_links=counts[2],
        response_links_correct=counts[3],
        **flags,
    )


# ---------------------------------------------------------------------------
# f_measure


def test_f_measure_is_harmonic_mean_at_beta_one():
    rng = random.Random(1)
    for _ in range(100):
        r, p = rng.random(), rng.random()
        if r == 0.0 and p == 0.0:
            continue
        assert f_measure(r, p, 1.0) == pytest.approx(2 * p * r / (p + r))


def test_f_measure_beta_swaps_with_inverse():
    rng = random.Random(2)
    for _ in range(100):
        r, p = 0.05 + 0.9 * rng.random(), 0.05 + 0.9 * rng.random()
        beta = 0.1 + 5 * rng.random()
        assert f_measure(r, p, beta) == pytest.approx(f_measure(p, r, 1.0 / beta))


def test_f_measure_limits_and_bounds():
    assert f_measure(0.0, 0.0, 1.0) == 0.0
    assert f_measure(1.0, 1.0, 2.0) == 1.0
    assert f_measure(0.7, 0.9, 100.0) == pytest.approx(0.7, abs=1e-3)
    assert f_measure(0.7, 0.9, 0.01) == pytest.approx(0.9, abs=1e-3)
    rng = random.Random(3)
    for _ in range(100):
        r, p = rng.random(), rng.random()
        f = f_measure(r, p, 2.0)
        assert min(r, p) - 1e-12 <= f <= max(r, p) + 1e-12


def test_f_measure_input_validation():
    with pytest.raises(ScoreError):
        f_measure(0.5, 0.5, 0.0)
    with pytest.raises(ScoreError):
        f_measure(1.5, 0.5, 1.0)
    with pytest.raises(ScoreError):
        f_measure(0.5, -0.1, 1.0)


def test_item_level_recall_precision():
    recall, precision = recall_precision_items({1, 2, 3, 4}, {2, 3, 4, 9, 10})
    assert (recall, precision) == (0.75, 0.6)
    assert recall_precision_items(set(), {1}) == (1.0, 0.0)
    assert recall_precision_items({1}, set()) == (0.0, 1.0)
    assert recall_precision_items(set(), set()) == (1.0, 1.0)


# ---------------------------------------------------------------------------
# document scoring


def test_partial_response_recall_via_closure():
    key = ChainPartition((("A", "B", "C"),))
    report = score_document(key, LinkSet.from_pairs([("A", "B")]))
    assert (report.recall, report.precision) == (0.5, 1.0)
    assert report.key_links == 2
    assert report.key_links_recovered == 1
    assert report.response_links == 1
    assert report.response_links_correct == 1
    assert report.f_measures[1.0] == pytest.approx(2 / 3)


def test_transitive_response_recovers_unstated_key_links():
    # response links A-C and B-C; the key link A-B holds in the closure
    key = ChainPartition((("A", "B", "C"),))
    report = score_document(key, LinkSet.from_pairs([("A", "C"), ("B", "C")]))
    assert (report.recall, report.precision) == (1.0, 1.0)


def test_wrong_cross_chain_link_scores_zero():
    key = ChainPartition((("A", "B"), ("C",)))
    report = score_document(key, LinkSet.from_pairs([("B", "C")]))
    assert (report.recall, report.precision) == (0.0, 0.0)
    assert all(v == 0.0 for v in report.f_measures.values())


def test_perfect_response_under_both_strategies():
    key = ChainPartition((("A", "B", "C", "D"), ("E",)))
    for strategy in (CONSECUTIVE, ALL_PAIRS):
        links = LinkSet.from_pairs([("A", "B"), ("B", "C"), ("C", "D")])
        report = score_document(key, links, strategy=strategy)
        assert (report.recall, report.precision) == (1.0, 1.0)
        assert report.key_links == (3 if strategy == CONSECUTIVE else 6)


def test_all_pairs_counts_each_key_pair():
    key = ChainPartition((("A", "B", "C", "D"),))
    report = score_document(key, LinkSet.from_pairs([("A", "B")]), strategy=ALL_PAIRS)
    assert report.key_links == 6
    assert report.key_links_recovered == 1
    assert report.recall == pytest.approx(1 / 6)


def test_singleton_key_is_vacuous():
    key = ChainPartition((("A",), ("B",)))
    report = score_document(key, LinkSet.from_pairs([]))
    assert (report.recall, report.precision) == (1.0, 1.0)
    assert report.vacuous_recall and report.vacuous_precision
    assert report.f_measures[2.0] == 1.0


def test_empty_response_against_real_key():
    key = ChainPartition((("A", "B"),))
    report = score_document(key, LinkSet.from_pairs([]))
    assert (report.recall, report.precision) == (0.0, 1.0)
    assert not report.vacuous_recall and report.vacuous_precision


def test_stray_response_endpoint_rejected():
    key = ChainPartition((("A", "B"),))
    with pytest.raises(ScoreError, match="outside the key"):
        score_document(key, LinkSet.from_pairs([("A", "Z")]))


def test_report_record_roundtrip():
    key = ChainPartition((("A", "B", "C"),))
    report = score_document(key, LinkSet.from_pairs([("A", "B")]))
    record = report_to_record(report)
    assert record["counts"]["key_links"] == 2
    assert set(record["f"]) == {"2.0", "1.0", "0.5"}
    assert report_from_record(record) == report


# ---------------------------------------------------------------------------
# aggregation


def test_macro_averages_then_recomputes_f():
    reports = [
        make_report(0.8, 0.9, (10, 8, 10, 9)),
        make_report(0.6, 0.7, (5, 3, 10, 7)),
    ]
    combined = aggregate(reports, MACRO)
    assert combined.recall == pytest.approx(0.7)
    assert combined.precision == pytest.approx(0.8)
    assert combined.f_measures[1.0] == pytest.approx(f_measure(0.7, 0.8, 1.0))
    # counts carry the pooled totals either way
    assert combined.key_links == 15
    assert combined.response_links == 20


def test_micro_pools_counts_before_dividing():
    reports = [
        make_report(0.8, 0.9, (10, 8, 10, 9)),
        make_report(0.6, 0.7, (5, 3, 10, 7)),
    ]
    combined = aggregate(reports, MICRO)
    assert combined.recall == pytest.approx(11 / 15)
    assert combined.precision == pytest.approx(16 / 20)
    assert combined.f_measures[0.5] == pytest.approx(f_measure(11 / 15, 0.8, 0.5))


def test_micro_example_from_two_scored_documents():
    key_one = ChainPartition((("A", "B", "C"),))
    report_one = score_document(key_one, LinkSet.from_pairs([("A", "B")]))
    key_two = ChainPartition((("A", "B"), ("C", "D")))
    report_two = score_document(key_two, LinkSet.from_pairs([("B", "C")]))
    combined = aggregate([report_one, report_two], MICRO)
    assert combined.recall == pytest.approx(1 / 4)
    assert combined.precision == pytest.approx(1 / 2)


def test_macro_skips_vacuous_documents_per_metric():
    reports = [
        make_report(1.0, 1.0, (0, 0, 0, 0), vacuous_recall=True, vacuous_precision=True),
        make_report(0.5, 1.0, (2, 1, 1, 1)),
        make_report(0.0, 1.0, (1, 0, 0, 0), vacuous_precision=True),
    ]
    combined = aggregate(reports, MACRO)
    assert combined.recall == pytest.approx(0.25)
    assert combined.precision == pytest.approx(1.0)
    assert not combined.vacuous_recall and not combined.vacuous_precision


def test_macro_with_one_sided_vacuous_pool():
    reports = [
        make_report(1.0, 0.5, (0, 0, 2, 1), vacuous_recall=True),
        make_report(1.0, 1.0, (0, 0, 1, 1), vacuous_recall=True),
    ]
    combined = aggregate(reports, MACRO)
    assert combined.vacuous_recall
    assert combined.recall == 1.0
    assert combined.precision == pytest.approx(0.75)


def test_single_report_aggregates_to_itself():
    report = make_report(0.5, 1.0, (2, 1, 1, 1))
    for mode in (MACRO, MICRO):
        assert aggregate([report], mode) == report


def test_aggregate_error_cases():
    with pytest.raises(ScoreError, match="nothing"):
        aggregate([], MACRO)
    vacuous = make_report(1.0, 1.0, (0, 0, 0, 0), vacuous_recall=True, vacuous_precision=True)
    with pytest.raises(ScoreError, match="vacuous"):
        aggregate([vacuous, vacuous], MICRO)
    with pytest.raises(ScoreError, match="aggregation"):
        aggregate([make_report(0.5, 1.0, (2, 1, 1, 1))], "median")
