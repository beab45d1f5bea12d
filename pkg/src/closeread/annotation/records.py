"""Close-reading annotation record types and their validity rules."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ValidationError

DIMENSIONS = ("sensical", "pragmatic", "novel")


@dataclass
class RatingRecord:
    annotator_id: str
    expr_id: str
    sensical: bool
    pragmatic: bool
    novel: bool
    rationale: str = ""
    comment: str = ""
    timestamp: str = ""

    def validate(self) -> None:
        if self.novel and not self.rationale.strip():
            raise ValidationError(
                "a novelty judgment requires a rationale", field="rationale")
        # pragmatic-but-nonsensical is allowed through and surfaced later;
        # annotators may disagree with the nesting

    @property
    def nesting_violation(self) -> bool:
        return self.pragmatic and not self.sensical

    @property
    def creative(self) -> bool:
        return self.sensical and self.pragmatic and self.novel


@dataclass
class HighlightRecord:
    annotator_id: str
    passage_id: str
    char_start: int
    char_end: int
    rationale: str
    timestamp: str = ""

    def validate(self, passage_len: int) -> None:
        if not self.rationale.strip():
            raise ValidationError(
                "a highlight requires a rationale", field="rationale")
        if self.char_start < 0 or self.char_end > passage_len:
            raise ValidationError(
                "highlight span exceeds passage bounds", field="char_start")
        if self.char_start >= self.char_end:
            raise ValidationError("highlight span is empty", field="char_end")


@dataclass
class Batch:
    batch_id: str
    passage_ids: list[str] = field(default_factory=list)
    assigned_annotators: list[str] = field(default_factory=list)
    is_training: bool = False

    def validate(self) -> None:
        if not self.passage_ids:
            raise ValidationError("batch has no passages", field="passage_ids")
        if len(set(self.passage_ids)) != len(self.passage_ids):
            raise ValidationError(
                "batch contains duplicate passages", field="passage_ids")


@dataclass
class CreativeLabel:
    expr_id: str
    annotator_id: str
    creative: bool
