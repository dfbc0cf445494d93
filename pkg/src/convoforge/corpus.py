"""Interleaved web-document model: ingestion, token budgets, document filtering.

Canonical input is one JSON record per line::

    {"doc_id": str, "url": str,
     "segments": [{"text": str} |
                  {"image": {"image_id": str, "source_uri": str, "alt_text": str?}}, ...]}

Segment order is preserved end to end; it determines where image placeholders
land when the context is rendered for prompting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .tokenizers import TokenCounter


class CorpusError(ValueError):
    """Unrecoverable corpus problem (strict-mode ingestion or a bad call)."""


class TokenizerFailure(CorpusError):
    """Tokenizer plugin raised while counting a document."""


@dataclass(frozen=True)
class ImageRef:
    image_id: str
    source_uri: str
    alt_text: str | None = None

    def __post_init__(self):
        if not self.image_id:
            raise CorpusError("image_id must be non-empty")
        if not self.source_uri:
            raise CorpusError("source_uri must be non-empty")


@dataclass(frozen=True)
class DocumentSegment:
    """Holds exactly one of ``text`` or ``image``."""

    text: str | None = None
    image: ImageRef | None = None

    def __post_init__(self):
        if (self.text is None) == (self.image is None):
            raise CorpusError("segment must hold exactly one of text or image")

    @property
    def is_image(self) -> bool:
        return self.image is not None


@dataclass
class WebDocument:
    doc_id: str
    url: str
    segments: list[DocumentSegment]

    def __post_init__(self):
        if not self.doc_id:
            raise CorpusError("doc_id must be non-empty")
        if not self.segments:
            raise CorpusError(f"document {self.doc_id!r} has no segments")
        if len(self.segments) == 1 and self.segments[0].text == "":
            raise CorpusError(f"document {self.doc_id!r} is a single empty text segment")
        seen: set[str] = set()
        for seg in self.segments:
            if seg.image is not None:
                if seg.image.image_id in seen:
                    raise CorpusError(
                        f"duplicate image_id {seg.image.image_id!r} in document {self.doc_id!r}"
                    )
                seen.add(seg.image.image_id)

    def image_refs(self) -> list[ImageRef]:
        return [seg.image for seg in self.segments if seg.image is not None]

    def text_segments(self) -> list[str]:
        return [seg.text for seg in self.segments if seg.text is not None]


@dataclass(frozen=True)
class TokenBudget:
    max_tokens: int = 2000

    def __post_init__(self):
        if self.max_tokens < 1:
            raise CorpusError("max_tokens must be >= 1")


def segment_to_record(seg: DocumentSegment) -> dict:
    if seg.image is not None:
        img: dict = {"image_id": seg.image.image_id, "source_uri": seg.image.source_uri}
        if seg.image.alt_text is not None:
            img["alt_text"] = seg.image.alt_text
        return {"image": img}
    return {"text": seg.text}


def document_to_record(doc: WebDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "url": doc.url,
        "segments": [segment_to_record(s) for s in doc.segments],
    }


def document_from_record(rec: dict) -> WebDocument:
    if not isinstance(rec, dict):
        raise CorpusError("record must be an object")
    missing = [k for k in ("doc_id", "url", "segments") if k not in rec]
    if missing:
        raise CorpusError(f"record missing fields: {', '.join(missing)}")
    if not isinstance(rec["segments"], list):
        raise CorpusError("segments must be a list")
    segments = []
    for i, s in enumerate(rec["segments"]):
        if not isinstance(s, dict):
            raise CorpusError(f"segment {i} must be an object")
        if "text" in s and "image" in s:
            raise CorpusError(f"segment {i} has both text and image")
        if "text" in s:
            if not isinstance(s["text"], str):
                raise CorpusError(f"segment {i} text must be a string")
            segments.append(DocumentSegment(text=s["text"]))
        elif "image" in s:
            img = s["image"]
            if not isinstance(img, dict):
                raise CorpusError(f"segment {i} image must be an object")
            segments.append(
                DocumentSegment(
                    image=ImageRef(
                        image_id=str(img.get("image_id") or ""),
                        source_uri=str(img.get("source_uri") or ""),
                        alt_text=img.get("alt_text"),
                    )
                )
            )
        else:
            raise CorpusError(f"segment {i} has neither text nor image")
    return WebDocument(doc_id=str(rec["doc_id"]), url=str(rec["url"]), segments=segments)


@dataclass(frozen=True)
class LoadIssue:
    line_no: int
    reason: str
    detail: str


def load_documents(
    source: str | Path | IO[str] | Iterable[str],
    strict: bool = False,
    diagnostics: list[LoadIssue] | None = None,
) -> Iterator[WebDocument]:
    """Lazily yield documents from a JSONL source (path, file object, or lines).

    Malformed lines and duplicate doc_ids abort in strict mode; in lenient
    mode they are skipped and recorded in ``diagnostics`` when provided.
    """
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).open(encoding="utf-8")
    else:
        lines = source

    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            issue = LoadIssue(line_no, "invalid-json", str(e))
            if strict:
                raise CorpusError(f"line {line_no}: invalid JSON: {e}") from e
            if diagnostics is not None:
                diagnostics.append(issue)
            continue
        try:
            doc = document_from_record(rec)
        except CorpusError as e:
            if strict:
                raise CorpusError(f"line {line_no}: {e}") from e
            if diagnostics is not None:
                diagnostics.append(LoadIssue(line_no, "invalid-record", str(e)))
            continue
        if doc.doc_id in seen_ids:
            if strict:
                raise CorpusError(f"line {line_no}: duplicate doc_id {doc.doc_id!r}")
            if diagnostics is not None:
                diagnostics.append(LoadIssue(line_no, "duplicate-doc-id", doc.doc_id))
            continue
        seen_ids.add(doc.doc_id)
        yield doc


def count_text_tokens(doc: WebDocument, tokenizer: TokenCounter) -> int:
    """Total token count over text segments; image segments contribute 0.

    Alt-text is not part of the budget: it travels to the prompt separately.
    """
    total = 0
    for text in doc.text_segments():
        try:
            total += tokenizer.count_tokens(text)
        except Exception as e:  # surfaces plugin failures with the doc attached
            raise TokenizerFailure(f"tokenizer {tokenizer.name!r} failed on doc {doc.doc_id!r}: {e}") from e
    return total


REASON_TOKENS = "tokens"
REASON_NO_IMAGE = "no-image"


@dataclass(frozen=True)
class FilterDecision:
    doc_id: str
    decision: str  # "kept" | "dropped"
    reason: str | None  # "tokens" | "no-image" | None
    token_count: int

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "decision": self.decision,
            "reason": self.reason,
            "token_count": self.token_count,
        }


@dataclass
class FilterReport:
    decisions: list[FilterDecision] = field(default_factory=list)

    @property
    def kept(self) -> int:
        return sum(1 for d in self.decisions if d.decision == "kept")

    @property
    def dropped(self) -> int:
        return sum(1 for d in self.decisions if d.decision == "dropped")

    def drop_reasons(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for d in self.decisions:
            if d.decision == "dropped" and d.reason:
                out[d.reason] = out.get(d.reason, 0) + 1
        return out


def filter_documents(
    docs: Iterable[WebDocument],
    budget: TokenBudget,
    tokenizer: TokenCounter,
    report: FilterReport | None = None,
) -> Iterator[WebDocument]:
    """Keep documents within the token budget that have at least one image.

    The boundary is inclusive (a document of exactly ``max_tokens`` is kept)
    and input order is preserved.
    """
    for doc in docs:
        count = count_text_tokens(doc, tokenizer)
        has_image = any(seg.is_image for seg in doc.segments)
        if count > budget.max_tokens:
            decision = FilterDecision(doc.doc_id, "dropped", REASON_TOKENS, count)
        elif not has_image:
            decision = FilterDecision(doc.doc_id, "dropped", REASON_NO_IMAGE, count)
        else:
            decision = FilterDecision(doc.doc_id, "kept", None, count)
        if report is not None:
            report.decisions.append(decision)
        if decision.decision == "kept":
            yield doc


def enumerate_image_contexts(
    doc: WebDocument, max_images: int | None = None
) -> list[tuple[ImageRef, list[ImageRef]]]:
    """One (primary, others) entry per image segment, in document order.

    ``max_images`` caps the number of entries per document; all images still
    appear in every entry's ``others`` list.
    """
    images = doc.image_refs()
    if not images:
        raise CorpusError(f"document {doc.doc_id!r} has no image segments")
    entries = []
    for i, primary in enumerate(images):
        if max_images is not None and i >= max_images:
            break
        entries.append((primary, [img for j, img in enumerate(images) if j != i]))
    return entries
