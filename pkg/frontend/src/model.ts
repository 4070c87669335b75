/** Record shapes and client-side validation mirroring the service's corpus format. */

export interface SlotsRecord {
  name: string | null;
  entity_type: string | null;
  relationship: string[];
  nationality: string | null;
}

export interface DiscourseRecord {
  trigger_family_id: string | null;
  partition_id: string | null;
}

export interface PhraseRecord {
  phrase_id: string;
  span: [number, number];
  string: string;
  sentence_index: number;
  entity_ids: string[];
  slots: SlotsRecord;
  discourse: DiscourseRecord | null;
  constituents: string[] | null;
}

export interface DocumentRecord {
  format: number;
  doc_id: string;
  text: string;
  sentences: [number, number][];
  phrases: PhraseRecord[];
}

export const ENTITY_TYPES = ["COMPANY", "GOVERNMENT", "PERSON"] as const;
export const RELATIONSHIP_VALUES = ["JV-PARENT", "JV-CHILD", "CHILD"] as const;

export interface Violation {
  code: string;
  location: string;
  message: string;
}

export function emptySlots(): SlotsRecord {
  return { name: null, entity_type: null, relationship: [], nationality: null };
}

export function clonePhrase(p: PhraseRecord): PhraseRecord {
  return {
    phrase_id: p.phrase_id,
    span: [p.span[0], p.span[1]],
    string: p.string,
    sentence_index: p.sentence_index,
    entity_ids: [...p.entity_ids],
    slots: { ...p.slots, relationship: [...p.slots.relationship] },
    discourse: p.discourse === null ? null : { ...p.discourse },
    constituents: p.constituents === null ? null : [...p.constituents],
  };
}

/** Index of the sentence whose range contains the offset, or null. */
export function sentenceIndexFor(doc: DocumentRecord, offset: number): number | null {
  for (let i = 0; i < doc.sentences.length; i++) {
    const [s, e] = doc.sentences[i]!;
    if (s <= offset && offset < e) return i;
  }
  return null;
}

/** Same checks (and codes) the service applies to a single phrase. */
export function validatePhrase(doc: DocumentRecord, p: PhraseRecord,
                               location = p.phrase_id): Violation[] {
  const out: Violation[] = [];
  const n = doc.text.length;
  const [s, e] = p.span;
  if (!(0 <= s && s < e && e <= n)) {
    out.push({ code: "span-bounds", location,
               message: `span (${s}, ${e}) outside text of length ${n}` });
    return out;
  }
  if (doc.text.slice(s, e) !== p.string) {
    out.push({ code: "string-mismatch", location,
               message: `string ${JSON.stringify(p.string)} != text slice` });
  }
  const sentence = doc.sentences[p.sentence_index];
  if (sentence === undefined) {
    out.push({ code: "sentence-index", location,
               message: `sentence index ${p.sentence_index} out of range` });
  } else if (!(sentence[0] <= s && s < sentence[1])) {
    out.push({ code: "sentence-index", location,
               message: `span start ${s} not inside sentence ${p.sentence_index}` });
  }
  if (p.entity_ids.length === 0) {
    out.push({ code: "entity-ids", location, message: "marked phrase has no entity ids" });
  }
  if (p.slots.entity_type !== null
      && !(ENTITY_TYPES as readonly string[]).includes(p.slots.entity_type)) {
    out.push({ code: "entity-type", location,
               message: `unknown entity type ${JSON.stringify(p.slots.entity_type)}` });
  }
  for (const r of p.slots.relationship) {
    if (!(RELATIONSHIP_VALUES as readonly string[]).includes(r)) {
      out.push({ code: "relationship", location,
                 message: `unknown relationship value ${JSON.stringify(r)}` });
    }
  }
  return out;
}

export function validatePhrases(doc: DocumentRecord, phrases: PhraseRecord[]): Violation[] {
  const out: Violation[] = [];
  const seen = new Set<string>();
  for (const p of phrases) {
    if (seen.has(p.phrase_id)) {
      out.push({ code: "duplicate-phrase-id", location: p.phrase_id,
                 message: `phrase id ${JSON.stringify(p.phrase_id)} reused` });
    }
    seen.add(p.phrase_id);
    out.push(...validatePhrase(doc, p));
  }
  return out;
}

/** Span order, ties by id; the order the service stores and renders. */
export function sortPhrases(phrases: PhraseRecord[]): PhraseRecord[] {
  return [...phrases].sort((a, b) =>
    a.span[0] - b.span[0] || a.span[1] - b.span[1]
    || (a.phrase_id < b.phrase_id ? -1 : a.phrase_id > b.phrase_id ? 1 : 0));
}

/**
 * Coreference chains drawn on screen: single-referent phrases grouped by
 * entity id, chains and members in document order.  Multireferent phrases
 * are excluded, exactly as the experiment pipeline excludes them.
 */
export function chainsOf(phrases: PhraseRecord[]): string[][] {
  const groups = new Map<string, string[]>();
  for (const p of sortPhrases(phrases)) {
    if (p.entity_ids.length !== 1) continue;
    const eid = p.entity_ids[0]!;
    const chain = groups.get(eid);
    if (chain === undefined) groups.set(eid, [p.phrase_id]);
    else chain.push(p.phrase_id);
  }
  return [...groups.values()];
}

function nextNumbered(used: Set<string>, render: (k: number) => string, start: number): string {
  for (let k = start; ; k++) {
    const candidate = render(k);
    if (!used.has(candidate)) return candidate;
  }
}

export function nextPhraseId(phrases: PhraseRecord[]): string {
  const used = new Set(phrases.map(p => p.phrase_id));
  return nextNumbered(used, k => `p${String(k).padStart(3, "0")}`, 0);
}

export function nextEntityId(phrases: PhraseRecord[]): string {
  const used = new Set(phrases.flatMap(p => p.entity_ids));
  return nextNumbered(used, k => `e${k}`, 1);
}
