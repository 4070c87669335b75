/** Working annotation state: local edits until an acknowledged save. */

import {
  DocumentRecord,
  PhraseRecord,
  SlotsRecord,
  Violation,
  clonePhrase,
  emptySlots,
  chainsOf,
  nextEntityId,
  nextPhraseId,
  sentenceIndexFor,
  sortPhrases,
  validatePhrase,
  validatePhrases,
} from "./model.js";
import type { LoadedDocument } from "./api.js";

export type SpanResult =
  | { ok: true; phrase: PhraseRecord }
  | { ok: false; reason: string };

export interface ReplayResult {
  kept: string[];
  dropped: string[];
}

export class StateError extends Error {}

export class AnnotationState {
  readonly doc: DocumentRecord;
  version: number;
  dirty = false;
  private phraseList: PhraseRecord[];

  constructor(loaded: LoadedDocument) {
    this.doc = loaded.document;
    this.version = loaded.version;
    this.phraseList = loaded.document.phrases.map(clonePhrase);
  }

  get phrases(): readonly PhraseRecord[] {
    return this.phraseList;
  }

  phrase(phraseId: string): PhraseRecord {
    const p = this.phraseList.find(p => p.phrase_id === phraseId);
    if (p === undefined) throw new StateError(`no phrase ${phraseId}`);
    return p;
  }

  /** Mark a text selection as a new phrase under a fresh entity. */
  markSpan(start: number, end: number): SpanResult {
    if (!(Number.isInteger(start) && Number.isInteger(end) && start < end)) {
      return { ok: false, reason: "selection is empty" };
    }
    if (start < 0 || end > this.doc.text.length) {
      return { ok: false, reason: "selection outside the text" };
    }
    const sentence = sentenceIndexFor(this.doc, start);
    if (sentence === null) {
      return { ok: false, reason: "selection starts outside every sentence" };
    }
    const phrase: PhraseRecord = {
      phrase_id: nextPhraseId(this.phraseList),
      span: [start, end],
      string: this.doc.text.slice(start, end),
      sentence_index: sentence,
      entity_ids: [nextEntityId(this.phraseList)],
      slots: emptySlots(),
      discourse: null,
      constituents: null,
    };
    // the constructor derives every field, so this can only fire on a bug
    const violations = validatePhrase(this.doc, phrase);
    if (violations.length > 0) {
      return { ok: false, reason: violations[0]!.message };
    }
    this.phraseList = sortPhrases([...this.phraseList, phrase]);
    this.dirty = true;
    return { ok: true, phrase };
  }

  removePhrase(phraseId: string): void {
    this.phrase(phraseId);
    this.phraseList = this.phraseList.filter(p => p.phrase_id !== phraseId);
    this.dirty = true;
  }

  /** Replace the phrase's entity assignment; null means a fresh entity. */
  assignEntity(phraseId: string, entityId: string | null): string {
    const phrase = this.phrase(phraseId);
    const eid = entityId ?? nextEntityId(this.phraseList);
    phrase.entity_ids = [eid];
    this.dirty = true;
    return eid;
  }

  /** Add a second (or later) entity id: an explicitly multireferent mark. */
  addEntity(phraseId: string, entityId: string | null): string {
    const phrase = this.phrase(phraseId);
    const eid = entityId ?? nextEntityId(this.phraseList);
    if (!phrase.entity_ids.includes(eid)) {
      phrase.entity_ids = [...phrase.entity_ids, eid].sort();
      this.dirty = true;
    }
    return eid;
  }

  removeEntity(phraseId: string, entityId: string): void {
    const phrase = this.phrase(phraseId);
    if (!phrase.entity_ids.includes(entityId)) return;
    if (phrase.entity_ids.length === 1) {
      throw new StateError("a marked phrase needs at least one entity");
    }
    phrase.entity_ids = phrase.entity_ids.filter(e => e !== entityId);
    this.dirty = true;
  }

  isMultireferent(phraseId: string): boolean {
    return this.phrase(phraseId).entity_ids.length > 1;
  }

  editSlots(phraseId: string, patch: Partial<SlotsRecord>): void {
    const phrase = this.phrase(phraseId);
    const merged: SlotsRecord = { ...phrase.slots, ...patch,
                                  relationship: patch.relationship ?? phrase.slots.relationship };
    const probe = { ...clonePhrase(phrase), slots: merged };
    const bad = validatePhrase(this.doc, probe)
      .filter(v => v.code === "entity-type" || v.code === "relationship");
    if (bad.length > 0) throw new StateError(bad[0]!.message);
    phrase.slots = merged;
    this.dirty = true;
  }

  editDiscourse(phraseId: string, discourse: { trigger_family_id: string | null;
                                               partition_id: string | null } | null): void {
    this.phrase(phraseId).discourse = discourse === null ? null : { ...discourse };
    this.dirty = true;
  }

  editConstituents(phraseId: string, constituents: string[] | null): void {
    this.phrase(phraseId).constituents = constituents === null ? null : [...constituents];
    this.dirty = true;
  }

  /** Entity ids in use, in document order of first appearance. */
  entities(): string[] {
    const seen: string[] = [];
    for (const p of this.phraseList) {
      for (const eid of p.entity_ids) {
        if (!seen.includes(eid)) seen.push(eid);
      }
    }
    return seen;
  }

  chains(): string[][] {
    return chainsOf(this.phraseList);
  }

  validate(): Violation[] {
    return validatePhrases(this.doc, this.phraseList);
  }

  /** Deep copy of the working phrases, in storage order, for a PUT body. */
  snapshot(): PhraseRecord[] {
    return sortPhrases(this.phraseList).map(clonePhrase);
  }

  markSaved(newVersion: number): void {
    this.version = newVersion;
    this.dirty = false;
  }

  /**
   * Conflict recovery: adopt the reloaded server state, then replay the
   * local phrases on top of it.  A local phrase that still validates
   * against the reloaded document replaces (or joins) the server's; one
   * that does not is dropped and reported.
   */
  reloadWith(loaded: LoadedDocument): ReplayResult {
    if (loaded.doc_id !== this.doc.doc_id) {
      throw new StateError(`reload for ${loaded.doc_id}, state holds ${this.doc.doc_id}`);
    }
    const local = this.phraseList;
    this.version = loaded.version;
    const merged = new Map(loaded.document.phrases.map(p => [p.phrase_id, clonePhrase(p)]));
    const kept: string[] = [];
    const dropped: string[] = [];
    for (const p of local) {
      if (validatePhrase(loaded.document, p).length === 0) {
        merged.set(p.phrase_id, clonePhrase(p));
        kept.push(p.phrase_id);
      } else {
        dropped.push(p.phrase_id);
      }
    }
    this.phraseList = sortPhrases([...merged.values()]);
    this.dirty = true;
    return { kept, dropped };
  }
}
