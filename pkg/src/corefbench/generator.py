"""Seeded generator for synthetic joint-venture news corpora.

Documents imitate the annotated shape of upper-case business wire text:
templated sentences, company-style names with alias forms, relationship and
nationality slots, and per-entity coreference keys.  Output is deterministic
for a given (params, seed) and always passes document validation.  Default
parameters target a pooled positive-instance rate around one quarter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Document, PhraseAnnotation, SlotSet, validate_document
from .pairgen import alias_test, NO

_SYLLABLES = ("KA", "TO", "MI", "SU", "RA", "NO", "TA", "KO", "YA", "SHI",
              "MA", "RU", "HA", "SE", "NA", "MO", "KI", "WA", "TE", "SA")
_CORE2 = ("HEAVY", "ELECTRIC", "MOTOR", "STEEL", "TRADING", "AIR", "TELECOM",
          "PRECISION", "CHEMICAL", "MARINE")
_SUFFIXES = ("CO.", "CORP.", "LTD.", "INC.", "GROUP", "INDUSTRIES")
_COUNTRIES = ("JAPAN", "TAIWAN", "SOUTH KOREA", "THAILAND", "CANADA",
              "FRANCE", "AUSTRALIA", "BRAZIL")

_VERBS_2 = ("WILL FORM A JOINT VENTURE WITH", "SIGNED AN AGREEMENT WITH",
            "WILL INVEST IN", "AGREED TO A TIE-UP WITH",
            "WILL SET UP A PLANT WITH")
_PREDICATES_1 = ("ANNOUNCED THE AGREEMENT", "CONFIRMED THE PLAN FRIDAY",
                 "WILL HOLD A MAJORITY STAKE", "DECLINED TO GIVE DETAILS",
                 "SAID THE DEAL AWAITS APPROVAL")
_PREDICATES_3 = ("WILL OPERATE THE VENTURE JOINTLY",
                 "SIGNED THE ACCORD IN TOKYO",
                 "WILL SHARE THE INITIAL CAPITAL")
_FILLERS = ("OFFICIALS SAID", "ON MONDAY", "IN TOKYO", "THE STATEMENT SAID",
            "UNDER THE AGREEMENT", "ACCORDING TO THE FILING",
            "THE TWO SIDES SAID", "PENDING REGULATORY REVIEW")

_DESCRIPTIVE_CHILD = ("THE JOINT VENTURE", "THE NEW COMPANY", "THE VENTURE")
_DESCRIPTIVE = {
    "COMPANY": ("THE COMPANY", "THE FIRM", "THE MAKER"),
    "GOVERNMENT": ("THE GOVERNMENT", "THE MINISTRY"),
    "PERSON": ("THE EXECUTIVE", "THE CHAIRMAN"),
}
_TYPES = ("COMPANY",) * 8 + ("GOVERNMENT", "PERSON")


class GeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    n_texts: int = 50
    entities_per_text: tuple[int, int] = (2, 4)
    mentions_per_entity: tuple[int, int] = (2, 4)
    alias_rate: float = 0.35
    jv_child_rate: float = 0.30
    lexicon_size: int = 150
    sentence_words: tuple[int, int] = (8, 16)
    descriptive_rate: float = 0.25
    unknown_relationship_rate: float = 0.20
    nationality_rate: float = 0.30
    subsidiary_rate: float = 0.15

    def __post_init__(self) -> None:
        if self.n_texts < 1:
            raise GeneratorError("n_texts must be >= 1")
        for label, (lo, hi) in (("entities_per_text", self.entities_per_text),
                                ("mentions_per_entity", self.mentions_per_entity),
                                ("sentence_words", self.sentence_words)):
            if lo < 1 or lo > hi:
                raise GeneratorError(f"{label} range ({lo}, {hi}) is not a valid range")
        for label in ("alias_rate", "jv_child_rate", "descriptive_rate",
                      "unknown_relationship_rate", "nationality_rate", "subsidiary_rate"):
            value = getattr(self, label)
            if not (0.0 <= value <= 1.0):
                raise GeneratorError(f"{label} must lie in [0, 1], got {value}")
        if self.lexicon_size < self.entities_per_text[1]:
            raise GeneratorError("lexicon_size smaller than entities_per_text upper bound")


def _make_lexicon(rng: random.Random, size: int) -> list[tuple[str, str]]:
    cores: set[str] = set()
    out: list[tuple[str, str]] = []
    while len(out) < size:
        word = "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4)))
        core = word if rng.random() < 0.6 else f"{word} {rng.choice(_CORE2)}"
        if core in cores:
            continue
        cores.add(core)
        out.append((core, f"{core} {rng.choice(_SUFFIXES)}"))
    return out


@dataclass
class _Entity:
    eid: str
    core: str
    full: str
    etype: str
    relationship: frozenset[str]
    nationality: str | None
    jv_child: bool


def _alias_safe(a: tuple[str, str], b: tuple[str, str]) -> bool:
    return all(alias_test(x, y) == NO for x in a for y in b)


def _sample_entities(rng: random.Random, lexicon, params: GeneratorParams) -> list[_Entity]:
    count = rng.randint(*params.entities_per_text)
    for _ in range(100):
        picks = rng.sample(lexicon, count)
        if all(_alias_safe(picks[i], picks[j])
               for i in range(count) for j in range(i + 1, count)):
            break
    else:
        raise GeneratorError("could not sample alias-distinct entities; enlarge the lexicon")
    entities = []
    for i, (core, full) in enumerate(picks):
        jv_child = rng.random() < params.jv_child_rate
        if jv_child:
            relationship = frozenset({"JV-CHILD"})
        elif rng.random() < params.unknown_relationship_rate:
            relationship = frozenset()
        elif rng.random() < params.subsidiary_rate:
            relationship = frozenset({"JV-PARENT", "CHILD"})
        else:
            relationship = frozenset({"JV-PARENT"})
        nationality = None
        if rng.random() < params.nationality_rate:
            nationality = f"{rng.choice(_COUNTRIES)} (COUNTRY)"
        entities.append(_Entity(
            eid=f"e{i}",
            core=core,
            full=full,
            etype=rng.choice(_TYPES),
            relationship=relationship,
            nationality=nationality,
            jv_child=jv_child,
        ))
    return entities


@dataclass
class _Mention:
    entity: _Entity
    surface: str
    named: bool


def _mentions_for(rng: random.Random, entity: _Entity, params: GeneratorParams) -> list[_Mention]:
    count = rng.randint(*params.mentions_per_entity)
    out = [_Mention(entity, entity.full, named=True)]
    for _ in range(count - 1):
        roll = rng.random()
        if roll < params.descriptive_rate:
            pool = _DESCRIPTIVE_CHILD if entity.jv_child else _DESCRIPTIVE[entity.etype]
            out.append(_Mention(entity, rng.choice(pool), named=False))
        elif roll < params.descriptive_rate + params.alias_rate:
            out.append(_Mention(entity, entity.core, named=True))
        else:
            out.append(_Mention(entity, entity.full, named=True))
    return out


def _sentence_parts(rng: random.Random, batch: list[_Mention], target_words: int) -> list:
    # a part is either a _Mention or a literal token string
    parts: list = []
    if len(batch) == 1:
        parts = [batch[0], rng.choice(_PREDICATES_1)]
    elif len(batch) == 2:
        parts = [batch[0], rng.choice(_VERBS_2), batch[1]]
    else:
        parts = [batch[0], ",", batch[1], "AND", batch[2], rng.choice(_PREDICATES_3)]

    def word_count() -> int:
        total = 0
        for part in parts:
            text = part.surface if isinstance(part, _Mention) else part
            total += len(text.split())
        return total

    while word_count() < target_words:
        parts.append(rng.choice(_FILLERS))
    parts.append(".")
    return parts


def generate_document(rng: random.Random, doc_id: str, lexicon,
                      params: GeneratorParams) -> Document:
    entities = _sample_entities(rng, lexicon, params)
    mentions: list[_Mention] = []
    for entity in entities:
        mentions.extend(_mentions_for(rng, entity, params))
    rng.shuffle(mentions)
    # an entity's first appearance must introduce it by name
    first_seen: dict[str, int] = {}
    for i, mention in enumerate(mentions):
        first_seen.setdefault(mention.entity.eid, i)
    for eid, i in first_seen.items():
        if not mentions[i].named:
            j = next(k for k, m in enumerate(mentions) if m.entity.eid == eid and m.named)
            mentions[i], mentions[j] = mentions[j], mentions[i]

    text_parts: list[str] = []
    sentences: list[tuple[int, int]] = []
    phrases: list[PhraseAnnotation] = []
    offset = 0
    queue = list(mentions)
    counter = 0
    while queue:
        take = rng.randint(1, min(3, len(queue)))
        batch, queue = queue[:take], queue[take:]
        parts = _sentence_parts(rng, batch, rng.randint(*params.sentence_words))
        start = offset
        chunks: list[str] = []
        for part in parts:
            if chunks:
                offset += 1  # joining space
            surface = part.surface if isinstance(part, _Mention) else part
            if isinstance(part, _Mention):
                entity = part.entity
                phrases.append(PhraseAnnotation(
                    phrase_id=f"p{counter:03d}",
                    span=(offset, offset + len(surface)),
                    string=surface,
                    sentence_index=len(sentences),
                    entity_ids=frozenset({entity.eid}),
                    slots=SlotSet(
                        name=part.surface if part.named else None,
                        entity_type=entity.etype,
                        relationship=entity.relationship,
                        nationality=entity.nationality,
                    ),
                ))
                counter += 1
            chunks.append(surface)
            offset += len(surface)
        sentences.append((start, offset))
        text_parts.append(" ".join(chunks))
        offset += 1  # space between sentences

    doc = Document(
        doc_id=doc_id,
        text=" ".join(text_parts),
        sentences=tuple(sentences),
        phrases=tuple(phrases),
    )
    violations = validate_document(doc)
    if violations:
        raise GeneratorError(f"generated document invalid: {violations[0]}")
    return doc


def generate_corpus(params: GeneratorParams = GeneratorParams(), seed: int = 0) -> list[Document]:
    """Deterministically generate ``params.n_texts`` annotated documents."""
    rng = random.Random(seed)
    lexicon = _make_lexicon(rng, params.lexicon_size)
    return [
        generate_document(rng, f"doc{i:03d}", lexicon, params)
        for i in range(params.n_texts)
    ]


PARAMS_FORMAT_VERSION = 1

_RANGE_FIELDS = ("entities_per_text", "mentions_per_entity", "sentence_words")
_INT_FIELDS = ("n_texts", "lexicon_size")
_RATE_FIELDS = ("alias_rate", "jv_child_rate", "descriptive_rate",
                "unknown_relationship_rate", "nationality_rate", "subsidiary_rate")


def params_to_record(params: GeneratorParams) -> dict:
    record: dict = {"format": PARAMS_FORMAT_VERSION}
    for name in _INT_FIELDS + _RATE_FIELDS:
        record[name] = getattr(params, name)
    for name in _RANGE_FIELDS:
        record[name] = list(getattr(params, name))
    return record


def params_from_record(obj) -> GeneratorParams:
    """Parse a params file record; absent fields keep their defaults."""
    if not isinstance(obj, dict):
        raise GeneratorError("params must be an object")
    if obj.get("format") != PARAMS_FORMAT_VERSION:
        raise GeneratorError(f"unsupported params format version {obj.get('format')!r}")
    allowed = {"format", *_INT_FIELDS, *_RATE_FIELDS, *_RANGE_FIELDS}
    unknown = set(obj) - allowed
    if unknown:
        raise GeneratorError(f"unknown params fields: {sorted(unknown)}")
    kwargs: dict = {}
    for name in _INT_FIELDS + _RATE_FIELDS:
        if name in obj:
            kwargs[name] = obj[name]
    for name in _RANGE_FIELDS:
        if name in obj:
            value = obj[name]
            if not isinstance(value, list) or len(value) != 2:
                raise GeneratorError(f"{name} must be a two-element range")
            kwargs[name] = (value[0], value[1])
    return GeneratorParams(**kwargs)
