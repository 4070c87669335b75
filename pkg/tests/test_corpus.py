"""Corpus record parsing, validation, serialization, and key chains."""

import dataclasses
import io
import json
import random

import pytest

from corefbench.corpus import (
    CorpusError,
    CorpusParseError,
    CorpusValidationError,
    Document,
    PhraseAnnotation,
    SlotSet,
    document_from_record,
    document_to_record,
    key_chains,
    load_corpus,
    parse_corpus,
    serialize_corpus,
    serialize_document,
    validate_document,
)
from conftest import build_doc


def sample_record():
    return {
        "format": 1,
        "doc_id": "d1",
        "text": "FAMILYMART CO. WILL OPEN A STORE. THE COMPANY SAID SO.",
        "sentences": [[0, 33], [34, 54]],
        "phrases": [
            {
                "phrase_id": "p001",
                "span": [0, 14],
                "string": "FAMILYMART CO.",
                "sentence_index": 0,
                "entity_ids": ["e1"],
                "slots": {
                    "name": "FAMILYMART CO.",
                    "entity_type": "COMPANY",
                    "relationship": ["CHILD", "JV-PARENT"],
                    "nationality": None,
                },
                "discourse": None,
                "constituents": None,
            },
            {
                "phrase_id": "p002",
                "span": [34, 45],
                "string": "THE COMPANY",
                "sentence_index": 1,
                "entity_ids": ["e1"],
                "slots": {
                    "name": None,
                    "entity_type": "COMPANY",
                    "relationship": [],
                    "nationality": None,
                },
                "discourse": {"trigger_family_id": "t1", "partition_id": "s1"},
                "constituents": ["COMPANY"],
            },
        ],
    }


def test_document_from_record_reads_all_fields():
    doc = document_from_record(sample_record())
    assert doc.doc_id == "d1"
    assert doc.sentences == ((0, 33), (34, 54))
    p1, p2 = doc.phrases
    assert p1.slots.name == "FAMILYMART CO."
    assert p1.slots.relationship == frozenset({"JV-PARENT", "CHILD"})
    assert p1.discourse is None
    assert p2.discourse.trigger_family_id == "t1"
    assert p2.constituents == ("COMPANY",)
    assert p2.entity_id == "e1"
    assert not p2.multireferent


def test_serialize_parse_roundtrip_is_byte_identical():
    doc = document_from_record(sample_record())
    text = serialize_document(doc) + "\n"
    corpus = parse_corpus(text)
    assert corpus.documents == [doc]
    assert serialize_corpus(corpus.documents) == text


def test_roundtrip_of_built_documents(jv_doc):
    other = build_doc(
        "d2",
        [
            {"entity": "e1", "name": "ACME CORP.", "entity_type": "COMPANY"},
            {"entity": "e2", "discourse": {"trigger_family_id": "t0"}},
            {"entity": "e1", "constituents": ["VENTURE", "ACME"]},
        ],
        per_sentence=2,
    )
    blob = serialize_corpus([jv_doc, other])
    parsed = parse_corpus(blob)
    assert parsed.documents == [jv_doc, other]
    assert serialize_corpus(parsed.documents) == blob


def test_unknown_field_rejected_at_each_level():
    rec = sample_record()
    rec["extra"] = 1
    with pytest.raises(CorpusParseError, match="unknown field 'extra'"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][0]["bogus"] = True
    with pytest.raises(CorpusParseError, match="bogus"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][0]["slots"]["headword"] = "CO"
    with pytest.raises(CorpusParseError, match="headword"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][1]["discourse"]["speaker"] = "x"
    with pytest.raises(CorpusParseError, match="speaker"):
        document_from_record(rec)


def test_missing_required_field_rejected():
    rec = sample_record()
    del rec["text"]
    with pytest.raises(CorpusParseError, match="missing field 'text'"):
        document_from_record(rec)
    rec = sample_record()
    del rec["phrases"][0]["span"]
    with pytest.raises(CorpusParseError, match="missing field 'span'"):
        document_from_record(rec)


def test_format_version_checked():
    rec = sample_record()
    rec["format"] = 2
    with pytest.raises(CorpusParseError, match="format version"):
        document_from_record(rec)


def test_wrong_types_rejected():
    rec = sample_record()
    rec["phrases"][0]["span"] = [0, "14"]
    with pytest.raises(CorpusParseError, match="pair of integers"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][0]["sentence_index"] = True
    with pytest.raises(CorpusParseError, match="wrong type"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][0]["slots"]["entity_type"] = "ROBOT"
    with pytest.raises(CorpusParseError, match="entity type"):
        document_from_record(rec)

    rec = sample_record()
    rec["phrases"][0]["slots"]["relationship"] = ["PARENT"]
    with pytest.raises(CorpusParseError, match="relationship"):
        document_from_record(rec)


def test_parse_reports_line_numbers():
    good = serialize_document(document_from_record(sample_record()))
    bad = good.replace('"format": 1', '"format": 3', 1).replace('"d1"', '"d2"', 1)
    with pytest.raises(CorpusParseError, match="line 3"):
        parse_corpus(good + "\n\n" + bad + "\n")
    with pytest.raises(CorpusParseError, match="line 1"):
        parse_corpus("{not json\n")


def test_duplicate_doc_id_rejected():
    line = serialize_document(document_from_record(sample_record()))
    with pytest.raises(CorpusParseError, match="duplicate doc_id"):
        parse_corpus(line + "\n" + line + "\n")


def test_parse_accepts_bytes_and_file_handles(tmp_path):
    blob = serialize_corpus([document_from_record(sample_record())])
    assert len(parse_corpus(blob.encode("utf-8"))) == 1
    assert len(parse_corpus(io.StringIO(blob))) == 1
    assert len(parse_corpus(io.BytesIO(blob.encode("utf-8")))) == 1
    path = tmp_path / "corpus.jsonl"
    path.write_text(blob, encoding="utf-8")
    assert len(load_corpus(path)) == 1


def test_multireferent_phrase_dropped_with_warning(caplog):
    rec = sample_record()
    rec["phrases"][1]["entity_ids"] = ["e1", "e2"]
    blob = json.dumps(rec) + "\n"
    with caplog.at_level("WARNING", logger="corefbench.corpus"):
        corpus = parse_corpus(blob)
    doc = corpus.documents[0]
    assert [p.phrase_id for p in doc.phrases] == ["p001"]
    assert len(corpus.warnings) == 1
    warning = corpus.warnings[0]
    assert (warning.doc_id, warning.phrase_id) == ("d1", "p002")
    assert "multireferent" in warning.message
    assert "multireferent" in caplog.text
    # reserialized output parses cleanly with no warnings
    again = parse_corpus(serialize_corpus(corpus.documents))
    assert again.warnings == []


def test_validate_clean_document(jv_doc):
    assert validate_document(jv_doc) == []


def _phrase(pid, span, string, sent=0, entities=("e1",), **slots):
    return PhraseAnnotation(
        phrase_id=pid,
        span=span,
        string=string,
        sentence_index=sent,
        entity_ids=frozenset(entities),
        slots=SlotSet(**slots),
        discourse=None,
        constituents=None,
    )


def test_validate_catches_each_violation():
    text = "AA BB CC"
    base = Document("d", text, ((0, 5), (6, 8)), (_phrase("p1", (0, 2), "AA"),))

    def codes(doc):
        return [v.code for v in validate_document(doc)]

    assert codes(dataclasses.replace(base, sentences=((0, 99),))) == ["sentence-bounds"]
    assert codes(dataclasses.replace(base, sentences=((0, 5), (3, 8)))) == ["sentence-order"]
    assert "span-bounds" in codes(
        dataclasses.replace(base, phrases=(_phrase("p1", (0, 99), "AA"),)))
    assert "phrase-order" in codes(dataclasses.replace(
        base, phrases=(_phrase("p1", (3, 5), "BB"), _phrase("p2", (0, 2), "AA"))))
    assert "string-mismatch" in codes(
        dataclasses.replace(base, phrases=(_phrase("p1", (0, 2), "XX"),)))
    assert "sentence-index" in codes(
        dataclasses.replace(base, phrases=(_phrase("p1", (0, 2), "AA", sent=5),)))
    # start sits in sentence 1's range, not sentence 0's
    assert "sentence-index" in codes(
        dataclasses.replace(base, phrases=(_phrase("p1", (6, 8), "CC", sent=0),)))
    assert "entity-ids" in codes(
        dataclasses.replace(base, phrases=(_phrase("p1", (0, 2), "AA", entities=()),)))
    assert "entity-type" in codes(dataclasses.replace(
        base, phrases=(_phrase("p1", (0, 2), "AA", entity_type="ROBOT"),)))
    assert "relationship" in codes(dataclasses.replace(
        base, phrases=(_phrase("p1", (0, 2), "AA", relationship=frozenset({"NIECE"})),)))
    assert "duplicate-phrase-id" in codes(dataclasses.replace(
        base, phrases=(_phrase("p1", (0, 2), "AA"), _phrase("p1", (3, 5), "BB"))))


def test_parse_corpus_raises_on_invalid_document():
    rec = sample_record()
    rec["phrases"][0]["string"] = "WRONG SLICE.."
    with pytest.raises(CorpusValidationError) as exc_info:
        parse_corpus(json.dumps(rec) + "\n")
    assert exc_info.value.doc_id == "d1"
    assert any(v.code == "string-mismatch" for v in exc_info.value.violations)


def test_document_phrase_lookup(jv_doc):
    assert jv_doc.phrase("p002").string == "TAIWAN'S LARGEST CAR DEALER"
    with pytest.raises(CorpusError, match="p999"):
        jv_doc.phrase("p999")


def test_key_chains_group_by_entity_in_document_order():
    doc = build_doc(
        "d",
        [
            {"entity": "e2"},
            {"entity": "e1"},
            {"entity": "e2"},
            {"entity": "e3"},
            {"entity": "e1"},
        ],
    )
    part = key_chains(doc)
    assert part.chains == (("p000", "p002"), ("p001", "p004"), ("p003",))


def test_key_chains_random_documents_partition_all_phrases():
    rng = random.Random(11)
    for _ in range(50):
        n_entities = rng.randint(1, 5)
        mentions = []
        for _ in range(rng.randint(1, 20)):
            mentions.append({"entity": f"e{rng.randrange(n_entities)}"})
        doc = build_doc("d", mentions)
        part = key_chains(doc)
        assert sorted(part.members) == sorted(p.phrase_id for p in doc.phrases)
        assert len(part.chains) == len({p.entity_id for p in doc.phrases})
        for chain in part.chains:
            ids = {doc.phrase(pid).entity_id for pid in chain}
            assert len(ids) == 1
