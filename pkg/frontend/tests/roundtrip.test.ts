/** Live round trip against the real Python service: annotate, save, export. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { AnnotationApi } from "../src/api.js";
import { AnnotationState } from "../src/state.js";
import { clonePhrase } from "../src/model.js";

const PYTHON = process.env["PYTHON"] ?? "python3";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as { port: number }).port;
      probe.close(() => resolve(port));
    });
  });
}

/** Chains the Python pipeline sees in the exported corpus. */
function pythonChains(corpusPath: string, docId: string): string[][] {
  const script = [
    "import json, sys",
    "from corefbench.corpus import parse_corpus, key_chains",
    "corpus = parse_corpus(open(sys.argv[1], encoding='utf-8').read())",
    "doc = next(d for d in corpus.documents if d.doc_id == sys.argv[2])",
    "print(json.dumps([list(c) for c in key_chains(doc).chains]))",
  ].join("\n");
  const out = execFileSync(PYTHON, ["-c", script, corpusPath, docId],
                           { encoding: "utf-8" });
  return JSON.parse(out) as string[][];
}

describe("service round trip", () => {
  let work: string;
  let server: ChildProcess | null = null;
  let api: AnnotationApi;

  beforeAll(async () => {
    work = mkdtempSync(join(tmpdir(), "annotator-"));
    const params = join(work, "params.json");
    const corpus = join(work, "corpus.jsonl");
    writeFileSync(params, JSON.stringify({ format: 1, n_texts: 2, lexicon_size: 40 }));
    execFileSync(PYTHON, ["-m", "corefbench.cli", "generate", "--seed", "7",
                          "--params", params, "--out", corpus]);

    const port = await freePort();
    server = spawn(PYTHON, ["-m", "corefbench.cli", "serve",
                            "--dir", join(work, "store"), "--corpus", corpus,
                            "--port", String(port)],
                   { stdio: ["ignore", "ignore", "pipe"] });
    let stderr = "";
    server.stderr!.on("data", chunk => { stderr += String(chunk); });

    api = new AnnotationApi(`http://127.0.0.1:${port}`);
    for (let attempt = 0; ; attempt++) {
      try {
        await api.listDocuments();
        break;
      } catch {
        if (server.exitCode !== null || attempt >= 100) {
          throw new Error(`service did not come up: ${stderr}`);
        }
        await new Promise(r => setTimeout(r, 200));
      }
    }
  }, 60_000);

  afterAll(() => {
    server?.kill("SIGTERM");
    rmSync(work, { recursive: true, force: true });
  });

  it("annotates, saves with versioning, and exports matching chains", async () => {
    const listing = await api.listDocuments();
    expect(listing.length).toBe(2);
    expect(listing.every(d => d.version === 1)).toBe(true);
    const docId = listing[0]!.doc_id;

    const loaded = await api.getDocument(docId);
    expect(loaded.version).toBe(1);
    expect(loaded.document.doc_id).toBe(docId);
    expect(loaded.document.phrases.length).toBeGreaterThan(1);

    // merge every phrase into the first phrase's entity and mark a new span
    const state = new AnnotationState(loaded);
    const target = state.phrases[0]!.entity_ids[0]!;
    for (const p of [...state.phrases]) state.assignEntity(p.phrase_id, target);
    const sentenceStart = loaded.document.sentences[0]![0];
    const marked = state.markSpan(sentenceStart, sentenceStart + 4);
    if (!marked.ok) throw new Error(marked.reason);
    expect(state.chains().length).toBe(2);
    expect(state.validate()).toEqual([]);

    const saved = await api.putPhrases(docId, state.version, state.snapshot());
    expect(saved).toEqual({ ok: true, version: 2 });
    state.markSaved(2);

    // a writer still holding version 1 must conflict, not overwrite
    const stale = await api.putPhrases(docId, 1, state.snapshot());
    expect(stale).toMatchObject({ ok: false, status: 409, currentVersion: 2 });

    // the service must reject (not store) an invalid annotation set
    const bad = clonePhrase(state.phrases[0]!);
    bad.entity_ids = [];
    const rejected = await api.putPhrases(docId, 2, [bad]);
    expect(rejected).toMatchObject({ ok: false, status: 422 });
    if (rejected.ok) throw new Error("unreachable");
    expect(rejected.violations!.map(v => v.code)).toContain("entity-ids");

    const reloaded = await api.getDocument(docId);
    expect(reloaded.version).toBe(2);
    expect(reloaded.document.phrases).toEqual(state.snapshot());

    // a multireferent mark survives storage but leaves the chains
    state.addEntity(state.phrases[1]!.phrase_id, null);
    const savedAgain = await api.putPhrases(docId, 2, state.snapshot());
    expect(savedAgain).toEqual({ ok: true, version: 3 });
    state.markSaved(3);

    const exported = await api.exportCorpus();
    const exportPath = join(work, "export.jsonl");
    writeFileSync(exportPath, exported);
    const lines = exported.trim().split("\n").map(l => JSON.parse(l) as { doc_id: string });
    expect(lines.map(d => d.doc_id).sort()).toEqual(listing.map(d => d.doc_id).sort());

    expect(pythonChains(exportPath, docId)).toEqual(state.chains());
  }, 60_000);
});
