"""Ordered first-match coreference rules with a not-coreferent default.

Rules are evaluated in fixed order; the first rule whose antecedent holds
decides the pair.  Rules 1-2 read discourse-level fields and never fire when
those fields are absent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document
from .pairgen import NO, YES, PhrasePair, normalize_name, pair_features

COREFERENT = "COREFERENT"
NOT_COREFERENT = "NOT_COREFERENT"


@dataclass(frozen=True)
class RuleDecision:
    label: str
    fired_rule: int | None
    trace: tuple[tuple[int, bool], ...]


def _evaluations(pair: PhrasePair, doc: Document) -> list[tuple[int, str, bool]]:
    pa, pb = doc.phrase(pair.first), doc.phrase(pair.second)
    feats = pair_features(pa, pb)
    da, db = pa.discourse, pb.discourse

    trig_a = da.trigger_family_id if da else None
    trig_b = db.trigger_family_id if db else None
    part_a = da.partition_id if da else None
    part_b = db.partition_id if db else None
    name_a, name_b = pa.slots.name, pb.slots.name
    named = name_a is not None and name_b is not None
    same_name = named and normalize_name(name_a) == normalize_name(name_b)

    return [
        (1, NOT_COREFERENT, trig_a is not None and trig_a == trig_b),
        (2, NOT_COREFERENT, part_a is not None and part_b is not None and part_a != part_b),
        (3, COREFERENT, feats["COMMON-NP"] == YES),
        (4, COREFERENT, feats["BOTH-JV-CHILD"] == YES),
        (5, COREFERENT, same_name),
        (6, COREFERENT, feats["ALIAS"] == YES),
        (7, NOT_COREFERENT, {feats["JV-CHILD-1"], feats["JV-CHILD-2"]} == {YES, NO}),
        (8, NOT_COREFERENT, named and not same_name and feats["ALIAS"] == NO),
    ]


RULE_DESCRIPTIONS = {
    1: "same trigger family",
    2: "different partitions",
    3: "common noun phrase",
    4: "both joint-venture children",
    5: "same name",
    6: "alias",
    7: "exactly one joint-venture child",
    8: "different non-alias names",
}


def classify_rules(pair: PhrasePair, doc: Document) -> RuleDecision:
    """First-match evaluation; the trace covers the rules actually tried."""
    trace: list[tuple[int, bool]] = []
    for index, label, fired in _evaluations(pair, doc):
        trace.append((index, fired))
        if fired:
            return RuleDecision(label, index, tuple(trace))
    return RuleDecision(NOT_COREFERENT, None, tuple(trace))


def rule_trace(pair: PhrasePair, doc: Document) -> str:
    """Human-readable evaluation of every antecedent plus the decision."""
    lines = [f"document {pair.doc_id} pair {pair.first}/{pair.second}"]
    decision = None
    for index, label, fired in _evaluations(pair, doc):
        mark = "yes" if fired else "no"
        lines.append(f"  rule {index} ({RULE_DESCRIPTIONS[index]}): {mark}")
        if fired and decision is None:
            decision = (index, label)
    if decision is None:
        lines.append(f"  decision: {NOT_COREFERENT} (no rule fired)")
    else:
        lines.append(f"  decision: {decision[1]} (rule {decision[0]})")
    return "\n".join(lines)
