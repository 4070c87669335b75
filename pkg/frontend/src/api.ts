/** Typed client for the annotation service's four endpoints. */

import type { DocumentRecord, PhraseRecord, Violation } from "./model.js";

export interface DocSummary {
  doc_id: string;
  version: number;
  phrase_count: number;
}

export interface LoadedDocument {
  doc_id: string;
  version: number;
  document: DocumentRecord;
}

export type SaveResult =
  | { ok: true; version: number }
  | { ok: false; status: number; error: string;
      currentVersion?: number; violations?: Violation[]; message?: string };

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class AnnotationApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // bind: a bare window.fetch reference loses its receiver
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  exportUrl(): string {
    return `${this.base}/export`;
  }

  private async getJson(path: string): Promise<unknown> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) {
      throw new ApiError(`GET ${path} failed: ${response.status}`, response.status);
    }
    return response.json();
  }

  async listDocuments(): Promise<DocSummary[]> {
    return (await this.getJson("/docs")) as DocSummary[];
  }

  async getDocument(docId: string): Promise<LoadedDocument> {
    return (await this.getJson(`/docs/${encodeURIComponent(docId)}`)) as LoadedDocument;
  }

  async putPhrases(docId: string, expectedVersion: number,
                   phrases: PhraseRecord[]): Promise<SaveResult> {
    const url = `${this.base}/docs/${encodeURIComponent(docId)}?version=${expectedVersion}`;
    const response = await this.fetchFn(url, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ phrases }),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (response.ok) {
      return { ok: true, version: body["version"] as number };
    }
    return {
      ok: false,
      status: response.status,
      error: (body["error"] as string) ?? "unknown",
      currentVersion: body["current_version"] as number | undefined,
      violations: body["violations"] as Violation[] | undefined,
      message: body["message"] as string | undefined,
    };
  }

  async exportCorpus(): Promise<string> {
    const response = await this.fetchFn(this.exportUrl());
    if (!response.ok) {
      throw new ApiError(`GET /export failed: ${response.status}`, response.status);
    }
    return response.text();
  }
}
