"""Shared fixtures and document builders for the test suite."""

import pytest

from corefbench.corpus import Discourse, Document, PhraseAnnotation, SlotSet

_SEP = " AND "


def build_doc(doc_id, mentions, per_sentence=1):
    """Assemble a valid Document from lightweight mention descriptors.

    Each descriptor is a dict; only "entity" (or "entities") is required.
    Recognised keys: string, name, entity_type, relationship, nationality,
    discourse, constituents, phrase_id.  Mentions are laid out left to
    right, `per_sentence` to a sentence, joined by a fixed separator so
    spans can be computed exactly.
    """
    batches = [mentions[i : i + per_sentence] for i in range(0, len(mentions), per_sentence)]
    parts: list[str] = []
    phrases = []
    sentences = []
    offset = 0
    count = 0
    for si, batch in enumerate(batches):
        start = offset
        chunk = []
        for j, m in enumerate(batch):
            if j:
                offset += len(_SEP)
            string = m.get("string", f"M{count}")
            entity_ids = m.get("entities") or {m.get("entity", "e0")}
            discourse = m.get("discourse")
            if isinstance(discourse, dict):
                discourse = Discourse(**discourse)
            constituents = m.get("constituents")
            if constituents is not None:
                constituents = tuple(constituents)
            phrases.append(
                PhraseAnnotation(
                    phrase_id=m.get("phrase_id", f"p{count:03d}"),
                    span=(offset, offset + len(string)),
                    string=string,
                    sentence_index=si,
                    entity_ids=frozenset(entity_ids),
                    slots=SlotSet(
                        name=m.get("name"),
                        entity_type=m.get("entity_type"),
                        relationship=frozenset(m.get("relationship", ())),
                        nationality=m.get("nationality"),
                    ),
                    discourse=discourse,
                    constituents=constituents,
                )
            )
            chunk.append(string)
            offset += len(string)
            count += 1
        sentences.append((start, offset))
        parts.append(_SEP.join(chunk))
        offset += 1
    return Document(
        doc_id=doc_id,
        text=" ".join(parts),
        sentences=tuple(sentences),
        phrases=tuple(phrases),
    )


# A two-phrase joint-venture snippet used by the feature and rule tests.
# Phrase 1 is a named company that is both a parent in one venture and a
# child in another; phrase 2 is a named foreign parent mentioned in a
# later sentence.  The expected feature vector is pinned in the tests.
_JV_TEXT = (
    "FAMILYMART CO. OF SEIBU SAISON GROUP WILL OPEN A CONVENIENCE STORE "
    "IN TAIPEI FRIDAY IN A JOINT VENTURE WITH TAIWAN'S LARGEST CAR "
    "DEALER, THE COMPANY SAID WEDNESDAY."
)


@pytest.fixture()
def jv_doc():
    first = "FAMILYMART CO."
    second = "TAIWAN'S LARGEST CAR DEALER"
    s1 = _JV_TEXT.index(second)
    boundary = _JV_TEXT.index("IN A JOINT VENTURE")
    phrases = (
        PhraseAnnotation(
            phrase_id="p001",
            span=(0, len(first)),
            string=first,
            sentence_index=0,
            entity_ids=frozenset({"e1"}),
            slots=SlotSet(
                name="FAMILYMART CO.",
                entity_type="COMPANY",
                relationship=frozenset({"JV-PARENT", "CHILD"}),
                nationality=None,
            ),
            discourse=None,
            constituents=None,
        ),
        PhraseAnnotation(
            phrase_id="p002",
            span=(s1, s1 + len(second)),
            string=second,
            sentence_index=1,
            entity_ids=frozenset({"e2"}),
            slots=SlotSet(
                name="TAIWAN",
                entity_type="COMPANY",
                relationship=frozenset({"JV-PARENT"}),
                nationality="Taiwan (COUNTRY)",
            ),
            discourse=None,
            constituents=None,
        ),
    )
    return Document(
        doc_id="jv01",
        text=_JV_TEXT,
        sentences=((0, boundary - 1), (boundary, len(_JV_TEXT))),
        phrases=phrases,
    )
