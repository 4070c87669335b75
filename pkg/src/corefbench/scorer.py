"""Closure-based recall/precision and the parameterized F measure.

Recall asks how many of the key's explicit links land inside the transitive
closure of the response; precision asks how many response links land inside
the closure of the key.  A metric whose denominator is zero scores 1.0 and is
flagged vacuous so aggregation can exclude it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .chains import (
    CONSECUTIVE,
    ChainPartition,
    LinkSet,
    close,
    explicit_links,
    in_closure,
)

DEFAULT_BETAS = (2.0, 1.0, 0.5)

MACRO = "macro"
MICRO = "micro"
AGGREGATIONS = (MACRO, MICRO)


class ScoreError(ValueError):
    pass


def f_measure(recall: float, precision: float, beta: float) -> float:
    """F = ((b^2 + 1) P R) / (b^2 P + R); beta weights recall over precision.

    Defined as 0 when both inputs are 0.
    """
    if beta <= 0:
        raise ScoreError(f"beta must be positive, got {beta}")
    if not (0.0 <= recall <= 1.0 and 0.0 <= precision <= 1.0):
        raise ScoreError(f"recall/precision outside [0, 1]: ({recall}, {precision})")
    if recall == 0.0 and precision == 0.0:
        return 0.0
    b2 = beta * beta
    return ((b2 + 1.0) * precision * recall) / (b2 * precision + recall)


def recall_precision_items(key_items: Iterable, response_items: Iterable) -> tuple[float, float]:
    """Plain set recall/precision; empty denominators score 1.0."""
    key = set(key_items)
    response = set(response_items)
    hits = len(key & response)
    recall = hits / len(key) if key else 1.0
    precision = hits / len(response) if response else 1.0
    return recall, precision


@dataclass(frozen=True)
class ScoreReport:
    recall: float
    precision: float
    f_measures: dict[float, float]
    key_links: int
    response_links: int
    key_links_recovered: int
    response_links_correct: int
    vacuous_recall: bool = False
    vacuous_precision: bool = False


def report_to_record(report: ScoreReport) -> dict:
    return {
        "recall": report.recall,
        "precision": report.precision,
        "f": {str(beta): value for beta, value in report.f_measures.items()},
        "counts": {
            "key_links": report.key_links,
            "response_links": report.response_links,
            "key_links_recovered": report.key_links_recovered,
            "response_links_correct": report.response_links_correct,
        },
        "vacuous_recall": report.vacuous_recall,
        "vacuous_precision": report.vacuous_precision,
    }


def report_from_record(obj: dict) -> ScoreReport:
    counts = obj["counts"]
    return ScoreReport(
        recall=obj["recall"],
        precision=obj["precision"],
        f_measures={float(b): v for b, v in obj["f"].items()},
        key_links=counts["key_links"],
        response_links=counts["response_links"],
        key_links_recovered=counts["key_links_recovered"],
        response_links_correct=counts["response_links_correct"],
        vacuous_recall=obj["vacuous_recall"],
        vacuous_precision=obj["vacuous_precision"],
    )


def _build_report(key_links: int, recovered: int, response_links: int, correct: int,
                  betas: Sequence[float]) -> ScoreReport:
    vacuous_recall = key_links == 0
    vacuous_precision = response_links == 0
    recall = 1.0 if vacuous_recall else recovered / key_links
    precision = 1.0 if vacuous_precision else correct / response_links
    return ScoreReport(
        recall=recall,
        precision=precision,
        f_measures={beta: f_measure(recall, precision, beta) for beta in betas},
        key_links=key_links,
        response_links=response_links,
        key_links_recovered=recovered,
        response_links_correct=correct,
        vacuous_recall=vacuous_recall,
        vacuous_precision=vacuous_precision,
    )


def score_document(key: ChainPartition, response: LinkSet,
                   strategy: str = CONSECUTIVE,
                   betas: Sequence[float] = DEFAULT_BETAS) -> ScoreReport:
    """Score one document's response links against its key partition."""
    stray = response.endpoints() - key.members
    if stray:
        raise ScoreError(f"response endpoints outside the key: {sorted(stray)}")
    key_expl = explicit_links(key, strategy)
    response_closure = close(response, sorted(key.members))
    recovered = sum(1 for link in key_expl if in_closure(response_closure, link))
    correct = sum(1 for link in response if in_closure(key, link))
    return _build_report(len(key_expl), recovered, len(response), correct, betas)


def aggregate(reports: Sequence[ScoreReport], mode: str = MACRO,
              betas: Sequence[float] | None = None) -> ScoreReport:
    """Combine per-document reports.

    MACRO averages the non-vacuous per-document recalls and precisions and
    recomputes F from the means; MICRO pools the link counts first.
    """
    if mode not in AGGREGATIONS:
        raise ScoreError(f"unknown aggregation {mode!r}")
    if not reports:
        raise ScoreError("nothing to aggregate")
    if all(r.vacuous_recall and r.vacuous_precision for r in reports):
        raise ScoreError("all reports are vacuous")
    if betas is None:
        betas = tuple(reports[0].f_measures)

    key_links = sum(r.key_links for r in reports)
    response_links = sum(r.response_links for r in reports)
    recovered = sum(r.key_links_recovered for r in reports)
    correct = sum(r.response_links_correct for r in reports)

    if mode == MICRO:
        return _build_report(key_links, recovered, response_links, correct, betas)

    recalls = [r.recall for r in reports if not r.vacuous_recall]
    precisions = [r.precision for r in reports if not r.vacuous_precision]
    vacuous_recall = not recalls
    vacuous_precision = not precisions
    recall = 1.0 if vacuous_recall else sum(recalls) / len(recalls)
    precision = 1.0 if vacuous_precision else sum(precisions) / len(precisions)
    return ScoreReport(
        recall=recall,
        precision=precision,
        f_measures={beta: f_measure(recall, precision, beta) for beta in betas},
        key_links=key_links,
        response_links=response_links,
        key_links_recovered=recovered,
        response_links_correct=correct,
        vacuous_recall=vacuous_recall,
        vacuous_precision=vacuous_precision,
    )
