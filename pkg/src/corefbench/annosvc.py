"""HTTP annotation service with optimistic, versioned writes.

Storage is a directory holding the corpus file format itself, one document
record per file, next to a small version counter.  Writes are accepted only
when the caller's expected version matches the stored one (compare-and-set);
an accepted write is durable on disk before the response is sent.  Invalid
documents are never persisted: a rejected write reports its violations and
leaves the store untouched.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from fastapi import Body, FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .corpus import (
    CorpusParseError,
    Document,
    PhraseAnnotation,
    Violation,
    document_from_record,
    document_to_record,
    phrase_from_record,
    serialize_document,
    validate_document,
)

_DOC_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class StoreError(ValueError):
    pass


class UnknownDocument(StoreError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"unknown document {doc_id!r}")


class VersionConflict(StoreError):
    def __init__(self, doc_id: str, expected: int, current: int):
        self.doc_id = doc_id
        self.expected = expected
        self.current = current
        super().__init__(
            f"document {doc_id!r} is at version {current}, write expected {expected}")


class ValidationRejected(StoreError):
    def __init__(self, doc_id: str, violations: list[Violation]):
        self.doc_id = doc_id
        self.violations = violations
        super().__init__(f"annotations for {doc_id!r} failed validation")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class DocumentStore:
    """Directory-backed document store with per-document version counters."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _doc_path(self, doc_id: str) -> Path:
        if not _DOC_ID_RE.match(doc_id):
            raise UnknownDocument(doc_id)
        return self.root / f"{doc_id}.json"

    def _version_path(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.version"

    def doc_ids(self) -> list[str]:
        return sorted(p.name[:-5] for p in self.root.glob("*.json")
                      if not p.name.startswith("."))

    def get(self, doc_id: str) -> tuple[Document, int]:
        path = self._doc_path(doc_id)
        if not path.exists():
            raise UnknownDocument(doc_id)
        doc = document_from_record(json.loads(path.read_text(encoding="utf-8")))
        try:
            version = int(self._version_path(doc_id).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StoreError(f"corrupt version counter for {doc_id!r}: {exc}") from None
        return doc, version

    def import_documents(self, documents: Sequence[Document]) -> int:
        """Seed the store; existing documents are left alone."""
        imported = 0
        with self._lock:
            for doc in documents:
                path = self._doc_path(doc.doc_id)
                if path.exists():
                    continue
                _atomic_write(path, serialize_document(doc))
                _atomic_write(self._version_path(doc.doc_id), "1\n")
                imported += 1
        return imported

    def put_annotations(self, doc_id: str, expected_version: int,
                        phrases: Sequence[PhraseAnnotation]) -> int:
        """Replace the document's phrases; returns the new version."""
        with self._lock:
            doc, current = self.get(doc_id)
            if expected_version != current:
                raise VersionConflict(doc_id, expected_version, current)
            ordered = tuple(sorted(phrases, key=lambda p: (p.span, p.phrase_id)))
            updated = replace(doc, phrases=ordered)
            violations = validate_document(updated)
            if violations:
                raise ValidationRejected(doc_id, violations)
            _atomic_write(self._doc_path(doc_id), serialize_document(updated))
            _atomic_write(self._version_path(doc_id), f"{current + 1}\n")
            return current + 1

    def export_text(self) -> str:
        lines = []
        for doc_id in self.doc_ids():
            doc, _ = self.get(doc_id)
            lines.append(serialize_document(doc))
        return "".join(line + "\n" for line in lines)


def _violation_records(violations: list[Violation]) -> list[dict]:
    return [{"code": v.code, "location": v.location, "message": v.message}
            for v in violations]


def create_app(store: DocumentStore) -> FastAPI:
    app = FastAPI(title="annotation service", docs_url=None, redoc_url=None,
                  openapi_url=None)
    # the browser UI is served from elsewhere; no credentials to protect
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/docs")
    def list_documents():
        out = []
        for doc_id in store.doc_ids():
            doc, version = store.get(doc_id)
            out.append({"doc_id": doc_id, "version": version,
                        "phrase_count": len(doc.phrases)})
        return out

    @app.get("/docs/{doc_id}")
    def get_document(doc_id: str):
        try:
            doc, version = store.get(doc_id)
        except UnknownDocument:
            return JSONResponse({"error": "unknown-document", "doc_id": doc_id},
                                status_code=404)
        return {"doc_id": doc_id, "version": version,
                "document": document_to_record(doc)}

    @app.put("/docs/{doc_id}")
    def put_document(doc_id: str, version: int, payload: dict = Body(...)):
        if set(payload) != {"phrases"} or not isinstance(payload["phrases"], list):
            return JSONResponse(
                {"error": "parse", "message": "body must be {\"phrases\": [...]}"},
                status_code=400)
        try:
            phrases = [phrase_from_record(p, f"phrases[{i}]")
                       for i, p in enumerate(payload["phrases"])]
        except CorpusParseError as exc:
            return JSONResponse({"error": "parse", "message": str(exc)}, status_code=400)
        try:
            new_version = store.put_annotations(doc_id, version, phrases)
        except UnknownDocument:
            return JSONResponse({"error": "unknown-document", "doc_id": doc_id},
                                status_code=404)
        except VersionConflict as exc:
            return JSONResponse(
                {"error": "version-conflict", "doc_id": doc_id,
                 "expected_version": exc.expected, "current_version": exc.current},
                status_code=409)
        except ValidationRejected as exc:
            return JSONResponse(
                {"error": "validation", "doc_id": doc_id,
                 "violations": _violation_records(exc.violations)},
                status_code=422)
        return {"doc_id": doc_id, "version": new_version}

    @app.get("/export")
    def export_corpus():
        return PlainTextResponse(store.export_text(),
                                 media_type="text/plain; charset=utf-8")

    return app
