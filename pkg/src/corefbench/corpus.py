"""Annotated-document model and its line-delimited file format.

A corpus file is UTF-8 text with one document record per line.  Records are
JSON objects with a required ``format`` field (current version 1) and exactly
the fields described by the dataclasses below; unknown fields are rejected.
Spans are stand-off half-open character ranges into the document text, and
sentence indices are 0-based.

Phrases carrying more than one entity id (multireferent) are representable in
the format but are dropped with a warning when a corpus is parsed; the
pairwise instance model downstream assumes one referent per phrase.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

from .chains import ChainPartition

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

ENTITY_TYPES = ("COMPANY", "GOVERNMENT", "PERSON")
RELATIONSHIP_VALUES = ("JV-PARENT", "JV-CHILD", "CHILD")


class CorpusError(ValueError):
    """Base class for corpus parse and validation failures."""


class CorpusParseError(CorpusError):
    """Schema violation while reading a record; carries the field path."""

    def __init__(self, message: str, *, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        where = f" at {path}" if path else ""
        where += f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class CorpusValidationError(CorpusError):
    """A structurally well-formed record that breaks a document invariant."""

    def __init__(self, doc_id: str, violations: list["Violation"]):
        self.doc_id = doc_id
        self.violations = violations
        lines = "; ".join(f"{v.location}: {v.message}" for v in violations)
        super().__init__(f"document {doc_id!r} invalid: {lines}")


@dataclass(frozen=True)
class Violation:
    code: str
    location: str
    message: str


@dataclass(frozen=True)
class Discourse:
    """Discourse-level analyzer outputs, when available."""

    trigger_family_id: str | None = None
    partition_id: str | None = None


@dataclass(frozen=True)
class SlotSet:
    """Semantic slots attached to an entity reference."""

    name: str | None = None
    entity_type: str | None = None
    relationship: frozenset[str] = frozenset()
    nationality: str | None = None


@dataclass(frozen=True)
class PhraseAnnotation:
    """One marked phrase: a stand-off span plus its slots and referents.

    ``constituents`` optionally lists constituent noun-phrase strings used by
    the COMMON-NP test; when absent the whole phrase string stands in.
    """

    phrase_id: str
    span: tuple[int, int]
    string: str
    sentence_index: int
    entity_ids: frozenset[str]
    slots: SlotSet = SlotSet()
    discourse: Discourse | None = None
    constituents: tuple[str, ...] | None = None

    @property
    def multireferent(self) -> bool:
        return len(self.entity_ids) > 1

    @property
    def entity_id(self) -> str:
        if len(self.entity_ids) != 1:
            raise CorpusError(f"phrase {self.phrase_id!r} has {len(self.entity_ids)} referents")
        return next(iter(self.entity_ids))


@dataclass(frozen=True)
class Document:
    """Immutable annotated document."""

    doc_id: str
    text: str
    sentences: tuple[tuple[int, int], ...]
    phrases: tuple[PhraseAnnotation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {p.phrase_id: p for p in self.phrases})

    def phrase(self, phrase_id: str) -> PhraseAnnotation:
        try:
            return self._by_id[phrase_id]
        except KeyError:
            raise CorpusError(f"document {self.doc_id!r} has no phrase {phrase_id!r}") from None


@dataclass(frozen=True)
class ParseWarning:
    doc_id: str
    phrase_id: str
    message: str


@dataclass
class Corpus:
    documents: list[Document]
    warnings: list[ParseWarning] = field(default_factory=list)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)


# ---------------------------------------------------------------------------
# validation


def validate_document(doc: Document) -> list[Violation]:
    """Check the document invariants; returns an empty list when clean."""
    out: list[Violation] = []
    n = len(doc.text)

    prev_end = 0
    for i, (s, e) in enumerate(doc.sentences):
        loc = f"sentences[{i}]"
        if not (0 <= s < e <= n):
            out.append(Violation("sentence-bounds", loc, f"range ({s}, {e}) outside text of length {n}"))
        elif s < prev_end:
            out.append(Violation("sentence-order", loc, "sentence ranges overlap or are out of order"))
        prev_end = max(prev_end, e)

    seen_ids: set[str] = set()
    prev_start = -1
    for i, p in enumerate(doc.phrases):
        loc = f"phrases[{i}]"
        if p.phrase_id in seen_ids:
            out.append(Violation("duplicate-phrase-id", loc, f"phrase id {p.phrase_id!r} reused"))
        seen_ids.add(p.phrase_id)
        s, e = p.span
        if not (0 <= s < e <= n):
            out.append(Violation("span-bounds", loc, f"span ({s}, {e}) outside text of length {n}"))
            continue
        if s < prev_start:
            out.append(Violation("phrase-order", loc, "phrases not sorted by span start"))
        prev_start = max(prev_start, s)
        if doc.text[s:e] != p.string:
            out.append(Violation(
                "string-mismatch", loc,
                f"string {p.string!r} != text slice {doc.text[s:e]!r}"))
        if not (0 <= p.sentence_index < len(doc.sentences)):
            out.append(Violation("sentence-index", loc, f"sentence index {p.sentence_index} out of range"))
        else:
            ss, se = doc.sentences[p.sentence_index]
            if not (ss <= s < se):
                out.append(Violation(
                    "sentence-index", loc,
                    f"span start {s} not inside sentence {p.sentence_index} range ({ss}, {se})"))
        if not p.entity_ids:
            out.append(Violation("entity-ids", loc, "marked phrase has no entity ids"))
        if p.slots.entity_type is not None and p.slots.entity_type not in ENTITY_TYPES:
            out.append(Violation("entity-type", loc, f"unknown entity type {p.slots.entity_type!r}"))
        for r in p.slots.relationship:
            if r not in RELATIONSHIP_VALUES:
                out.append(Violation("relationship", loc, f"unknown relationship value {r!r}"))
    return out


# ---------------------------------------------------------------------------
# record <-> object


def _expect_keys(obj: dict, allowed: dict[str, bool], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise CorpusParseError(f"unknown field {key!r}", path=path)
    for key, required in allowed.items():
        if required and key not in obj:
            raise CorpusParseError(f"missing field {key!r}", path=path)


def _expect(obj: dict, key: str, types, path: str, optional: bool = False):
    value = obj.get(key)
    if value is None:
        if optional:
            return None
        raise CorpusParseError(f"field {key!r} must not be null", path=path)
    if not isinstance(value, types) or isinstance(value, bool):
        raise CorpusParseError(
            f"field {key!r} has wrong type {type(value).__name__}", path=path)
    return value


def _parse_range(value, path: str) -> tuple[int, int]:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise CorpusParseError("range must be a pair of integers", path=path)
    return (value[0], value[1])


def _parse_string_list(value, path: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise CorpusParseError("expected a list of strings", path=path)
    return tuple(value)


def slots_from_record(obj, path: str = "slots") -> SlotSet:
    if not isinstance(obj, dict):
        raise CorpusParseError("slots must be an object", path=path)
    _expect_keys(obj, {"name": False, "entity_type": False, "relationship": False,
                       "nationality": False}, path)
    relationship: frozenset[str] = frozenset()
    if obj.get("relationship") is not None:
        relationship = frozenset(_parse_string_list(obj["relationship"], f"{path}.relationship"))
    entity_type = _expect(obj, "entity_type", str, path, optional=True)
    if entity_type is not None and entity_type not in ENTITY_TYPES:
        raise CorpusParseError(f"unknown entity type {entity_type!r}", path=f"{path}.entity_type")
    for r in relationship:
        if r not in RELATIONSHIP_VALUES:
            raise CorpusParseError(f"unknown relationship value {r!r}", path=f"{path}.relationship")
    return SlotSet(
        name=_expect(obj, "name", str, path, optional=True),
        entity_type=entity_type,
        relationship=relationship,
        nationality=_expect(obj, "nationality", str, path, optional=True),
    )


def phrase_from_record(obj, path: str = "phrase") -> PhraseAnnotation:
    if not isinstance(obj, dict):
        raise CorpusParseError("phrase must be an object", path=path)
    _expect_keys(obj, {"phrase_id": True, "span": True, "string": True,
                       "sentence_index": True, "entity_ids": True, "slots": False,
                       "discourse": False, "constituents": False}, path)
    discourse = None
    if obj.get("discourse") is not None:
        dobj = obj["discourse"]
        if not isinstance(dobj, dict):
            raise CorpusParseError("discourse must be an object", path=f"{path}.discourse")
        _expect_keys(dobj, {"trigger_family_id": False, "partition_id": False}, f"{path}.discourse")
        discourse = Discourse(
            trigger_family_id=_expect(dobj, "trigger_family_id", str, f"{path}.discourse", optional=True),
            partition_id=_expect(dobj, "partition_id", str, f"{path}.discourse", optional=True),
        )
    constituents = None
    if obj.get("constituents") is not None:
        constituents = _parse_string_list(obj["constituents"], f"{path}.constituents")
    slots = SlotSet() if obj.get("slots") is None else slots_from_record(obj["slots"], f"{path}.slots")
    return PhraseAnnotation(
        phrase_id=_expect(obj, "phrase_id", str, path),
        span=_parse_range(_expect(obj, "span", list, path), f"{path}.span"),
        string=_expect(obj, "string", str, path),
        sentence_index=_expect(obj, "sentence_index", int, path),
        entity_ids=frozenset(_parse_string_list(obj["entity_ids"], f"{path}.entity_ids")),
        slots=slots,
        discourse=discourse,
        constituents=constituents,
    )


def document_from_record(obj, path: str = "document") -> Document:
    if not isinstance(obj, dict):
        raise CorpusParseError("record must be an object", path=path)
    _expect_keys(obj, {"format": True, "doc_id": True, "text": True,
                       "sentences": True, "phrases": True}, path)
    version = _expect(obj, "format", int, path)
    if version != FORMAT_VERSION:
        raise CorpusParseError(f"unsupported format version {version}", path=path)
    doc_id = _expect(obj, "doc_id", str, path)
    path = f"document {doc_id!r}"
    sentences = _expect(obj, "sentences", list, path)
    phrases = _expect(obj, "phrases", list, path)
    return Document(
        doc_id=doc_id,
        text=_expect(obj, "text", str, path),
        sentences=tuple(_parse_range(s, f"{path}.sentences[{i}]") for i, s in enumerate(sentences)),
        phrases=tuple(phrase_from_record(p, f"{path}.phrases[{i}]") for i, p in enumerate(phrases)),
    )


def slots_to_record(slots: SlotSet) -> dict:
    return {
        "name": slots.name,
        "entity_type": slots.entity_type,
        "relationship": sorted(slots.relationship),
        "nationality": slots.nationality,
    }


def phrase_to_record(p: PhraseAnnotation) -> dict:
    return {
        "phrase_id": p.phrase_id,
        "span": list(p.span),
        "string": p.string,
        "sentence_index": p.sentence_index,
        "entity_ids": sorted(p.entity_ids),
        "slots": slots_to_record(p.slots),
        "discourse": None if p.discourse is None else {
            "trigger_family_id": p.discourse.trigger_family_id,
            "partition_id": p.discourse.partition_id,
        },
        "constituents": None if p.constituents is None else list(p.constituents),
    }


def document_to_record(doc: Document) -> dict:
    return {
        "format": FORMAT_VERSION,
        "doc_id": doc.doc_id,
        "text": doc.text,
        "sentences": [list(s) for s in doc.sentences],
        "phrases": [phrase_to_record(p) for p in doc.phrases],
    }


def serialize_document(doc: Document) -> str:
    return json.dumps(document_to_record(doc), ensure_ascii=False)


def serialize_corpus(documents: Iterable[Document]) -> str:
    return "".join(serialize_document(d) + "\n" for d in documents)


# ---------------------------------------------------------------------------
# parsing


def _decode_lines(source) -> Iterable[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").splitlines()
    if isinstance(source, str):
        return source.splitlines()
    # file-like; read() may yield bytes or text
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def parse_corpus(source: str | bytes | IO) -> Corpus:
    """Parse a corpus stream.

    Multireferent phrases are dropped with a warning record; any document
    that breaks an invariant after filtering raises CorpusValidationError.
    """
    documents: list[Document] = []
    warnings: list[ParseWarning] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_decode_lines(source), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"invalid record: {exc.msg}", line=lineno) from None
        try:
            doc = document_from_record(obj)
        except CorpusParseError as exc:
            raise CorpusParseError(str(exc), line=lineno) from None
        if doc.doc_id in seen:
            raise CorpusParseError(f"duplicate doc_id {doc.doc_id!r}", line=lineno)
        seen.add(doc.doc_id)

        kept = []
        for p in doc.phrases:
            if p.multireferent:
                warning = ParseWarning(
                    doc.doc_id, p.phrase_id,
                    f"dropped multireferent phrase ({len(p.entity_ids)} referents)")
                warnings.append(warning)
                log.warning("%s: %s", warning.doc_id, warning.message)
            else:
                kept.append(p)
        if len(kept) != len(doc.phrases):
            doc = replace(doc, phrases=tuple(kept))

        violations = validate_document(doc)
        if violations:
            raise CorpusValidationError(doc.doc_id, violations)
        documents.append(doc)
    return Corpus(documents, warnings)


def load_corpus(path) -> Corpus:
    with open(path, "rb") as handle:
        return parse_corpus(handle)


# ---------------------------------------------------------------------------
# key chains


def key_chains(doc: Document) -> ChainPartition:
    """Group the document's phrases into chains by shared entity id.

    Chains keep document order; phrases must be single-referent (parse_corpus
    guarantees this).
    """
    groups: dict[str, list[str]] = {}
    for p in doc.phrases:
        groups.setdefault(p.entity_id, []).append(p.phrase_id)
    return ChainPartition(tuple(tuple(g) for g in groups.values()))
