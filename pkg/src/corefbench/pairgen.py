"""Pairwise classification instances over a document's marked phrases.

Every unordered pair of phrases yields one instance: eight categorical
features plus a coreference label taken from the key annotation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .chains import ChainPartition
from .corpus import Document, PhraseAnnotation, key_chains

YES = "YES"
NO = "NO"
UNKNOWN = "UNKNOWN"

POSITIVE = "POSITIVE"
NEGATIVE = "NEGATIVE"
UNLABELED = "UNLABELED"

# Declared feature order doubles as the tie-break order for tree induction.
FEATURE_SCHEMA: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("NAME-1", (YES, NO)),
    ("JV-CHILD-1", (YES, NO, UNKNOWN)),
    ("NAME-2", (YES, NO)),
    ("JV-CHILD-2", (YES, NO, UNKNOWN)),
    ("ALIAS", (YES, NO)),
    ("BOTH-JV-CHILD", (YES, NO, UNKNOWN)),
    ("COMMON-NP", (YES, NO)),
    ("SAME-SENTENCE", (YES, NO)),
)
FEATURE_NAMES = tuple(name for name, _ in FEATURE_SCHEMA)
FEATURE_VALUES = dict(FEATURE_SCHEMA)


class PairError(ValueError):
    pass


def normalize_name(name: str) -> str:
    """Uppercase, collapse whitespace, strip trailing periods from tokens."""
    tokens = (t.rstrip(".") for t in name.upper().split())
    return " ".join(t for t in tokens if t)


def _is_token_sublist(needle: list[str], hay: list[str]) -> bool:
    n = len(needle)
    return any(hay[i:i + n] == needle for i in range(len(hay) - n + 1))


def alias_test(name_a: str, name_b: str) -> str:
    """YES iff one normalized name is a contiguous token run of the other.

    Matching is anchored at word boundaries, so "SUMITOMO" is an alias of
    "SUMITOMO CORP." but "SUMI" is not.
    """
    if not name_a or not name_b:
        raise PairError("alias test needs two non-empty names")
    ta = normalize_name(name_a).split()
    tb = normalize_name(name_b).split()
    if not ta or not tb:
        return NO
    return YES if _is_token_sublist(ta, tb) or _is_token_sublist(tb, ta) else NO


@dataclass(frozen=True)
class PhrasePair:
    """Unordered phrase pair in canonical document order."""

    doc_id: str
    first: str
    second: str

    def __post_init__(self) -> None:
        if self.first == self.second:
            raise PairError(f"pair of {self.first!r} with itself")


def pair_for(doc: Document, a: str, b: str) -> PhrasePair:
    """Build the canonical pair: first precedes second by span, ties by id order."""
    pa, pb = doc.phrase(a), doc.phrase(b)
    if (pa.span[0], pa.span[1]) > (pb.span[0], pb.span[1]):
        pa, pb = pb, pa
    return PhrasePair(doc.doc_id, pa.phrase_id, pb.phrase_id)


@dataclass(frozen=True)
class Instance:
    """A feature vector for one phrase pair, optionally labeled."""

    pair: PhrasePair
    features: Mapping[str, str] = field(hash=False)
    label: str = UNLABELED

    def __post_init__(self) -> None:
        if set(self.features) != set(FEATURE_NAMES):
            missing = set(FEATURE_NAMES) - set(self.features)
            extra = set(self.features) - set(FEATURE_NAMES)
            raise PairError(f"bad feature keys (missing {sorted(missing)}, extra {sorted(extra)})")
        for name in FEATURE_NAMES:
            if self.features[name] not in FEATURE_VALUES[name]:
                raise PairError(f"feature {name} has invalid value {self.features[name]!r}")
        if self.label not in (POSITIVE, NEGATIVE, UNLABELED):
            raise PairError(f"invalid label {self.label!r}")


def generate_pairs(doc: Document) -> list[PhrasePair]:
    """All C(n, 2) pairs, listed by first span then second span."""
    ordered = sorted(doc.phrases, key=lambda p: p.span)
    return [
        PhrasePair(doc.doc_id, a.phrase_id, b.phrase_id)
        for a, b in itertools.combinations(ordered, 2)
    ]


def label_pair(pair: PhrasePair, key: ChainPartition) -> str:
    return POSITIVE if key.same_chain(pair.first, pair.second) else NEGATIVE


def _name_feature(p: PhraseAnnotation) -> str:
    return YES if p.slots.name is not None else NO


def _jv_child_feature(p: PhraseAnnotation) -> str:
    rel = p.slots.relationship
    if not rel:
        return UNKNOWN
    return YES if "JV-CHILD" in rel else NO


def _constituent_keys(p: PhraseAnnotation) -> set[str]:
    parts = p.constituents if p.constituents else (p.string,)
    return {normalize_name(c) for c in parts if normalize_name(c)}


def pair_features(pa: PhraseAnnotation, pb: PhraseAnnotation) -> dict[str, str]:
    """The eight feature values for an ordered (first, second) phrase pair."""
    jv_a, jv_b = _jv_child_feature(pa), _jv_child_feature(pb)
    if jv_a == YES and jv_b == YES:
        both = YES
    elif jv_a == NO and jv_b == NO:
        both = NO
    else:
        both = UNKNOWN
    named = pa.slots.name is not None and pb.slots.name is not None
    return {
        "NAME-1": _name_feature(pa),
        "JV-CHILD-1": jv_a,
        "NAME-2": _name_feature(pb),
        "JV-CHILD-2": jv_b,
        "ALIAS": alias_test(pa.slots.name, pb.slots.name) if named else NO,
        "BOTH-JV-CHILD": both,
        "COMMON-NP": YES if _constituent_keys(pa) & _constituent_keys(pb) else NO,
        "SAME-SENTENCE": YES if pa.sentence_index == pb.sentence_index else NO,
    }


def extract_features(pair: PhrasePair, doc: Document, label: str = UNLABELED) -> Instance:
    if pair.doc_id != doc.doc_id:
        raise PairError(f"pair from {pair.doc_id!r} against document {doc.doc_id!r}")
    features = pair_features(doc.phrase(pair.first), doc.phrase(pair.second))
    return Instance(pair, features, label)


def instances_for_document(doc: Document, labeled: bool = True) -> list[Instance]:
    """Feature vectors for every pair, labeled from the document's key."""
    key = key_chains(doc) if labeled else None
    out = []
    for pair in generate_pairs(doc):
        label = label_pair(pair, key) if key is not None else UNLABELED
        out.append(extract_features(pair, doc, label))
    return out


# ---------------------------------------------------------------------------
# instance dump format: one instance per line


def instance_to_record(inst: Instance) -> dict:
    return {
        "doc_id": inst.pair.doc_id,
        "first": inst.pair.first,
        "second": inst.pair.second,
        "features": {name: inst.features[name] for name in FEATURE_NAMES},
        "label": inst.label,
    }


def instance_from_record(obj) -> Instance:
    if not isinstance(obj, dict):
        raise PairError("instance record must be an object")
    expected = {"doc_id", "first", "second", "features", "label"}
    if set(obj) != expected:
        raise PairError(f"instance record fields {sorted(obj)} != {sorted(expected)}")
    features = obj["features"]
    if not isinstance(features, dict):
        raise PairError("features must be an object")
    return Instance(
        PhrasePair(obj["doc_id"], obj["first"], obj["second"]),
        dict(features),
        obj["label"],
    )


def serialize_instances(instances: Iterable[Instance]) -> str:
    return "".join(json.dumps(instance_to_record(i), ensure_ascii=False) + "\n" for i in instances)


def parse_instances(text: str) -> list[Instance]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(instance_from_record(json.loads(line)))
        except (json.JSONDecodeError, PairError) as exc:
            raise PairError(f"bad instance record on line {lineno}: {exc}") from None
    return out
