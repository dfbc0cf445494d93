"""Caption records produced by the captioning stage."""

from __future__ import annotations

from dataclasses import dataclass

CONTEXTUAL = "contextual"
NONCONTEXTUAL = "noncontextual"


@dataclass(frozen=True)
class ContextualCaption:
    """A caption for one primary image of one document, with provenance."""

    doc_id: str
    image_id: str
    text: str
    backend: str = ""
    prompt_variant: str = CONTEXTUAL  # contextual | noncontextual
    created_at: str = ""

    def to_record(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "image_id": self.image_id,
            "text": self.text,
            "backend": self.backend,
            "prompt_variant": self.prompt_variant,
            "created_at": self.created_at,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ContextualCaption":
        return cls(
            doc_id=rec["doc_id"],
            image_id=rec["image_id"],
            text=rec["text"],
            backend=rec.get("backend", ""),
            prompt_variant=rec.get("prompt_variant", CONTEXTUAL),
            created_at=rec.get("created_at", ""),
        )
