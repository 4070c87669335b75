import { DocumentRecord, PhraseRecord, emptySlots } from "../src/model.js";

export function makePhrase(overrides: Partial<PhraseRecord> = {}): PhraseRecord {
  return {
    phrase_id: "p000",
    span: [0, 5],
    string: "ALPHA",
    sentence_index: 0,
    entity_ids: ["e1"],
    slots: emptySlots(),
    discourse: null,
    constituents: null,
    ...overrides,
  };
}

export function makeDoc(overrides: Partial<DocumentRecord> = {}): DocumentRecord {
  // two sentences with a one-character gap: "ALPHA MET BETA. |THEY AGREED."
  return {
    format: 1,
    doc_id: "doc0",
    text: "ALPHA MET BETA. THEY AGREED.",
    sentences: [[0, 15], [16, 28]],
    phrases: [makePhrase()],
    ...overrides,
  };
}
