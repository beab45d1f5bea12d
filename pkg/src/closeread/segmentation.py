"""Passage segmentation into atomic annotation units.

A passage is split at punctuation into minimal "atomic" expressions.  The
base rule is a flat split at every punctuation mark in SPLIT_CHARS; the
optional heuristics (quote protection, short-span merging, abbreviation
list) are off unless configured, so the default output follows the plain
rule exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import ArgumentError
from .tokenization import split_text

SPLIT_CHARS = set(".,;:!?—…()")  # — em dash, … ellipsis

_QUOTE_PAIRS = [("“", "”"), ('"', '"')]

DEFAULT_ABBREVIATIONS = (
    "Dr", "Mr", "Mrs", "Ms", "Prof", "St", "Jr", "Sr",
    "vs", "etc", "e.g", "i.e", "cf", "al",
)


@dataclass(frozen=True)
class SplitConfig:
    """Heuristic knobs for split_atomic; all heuristics opt-in."""

    protect_short_quotes: bool = False  # never split inside quotes < quote_max_tokens
    quote_max_tokens: int = 6
    merge_min_tokens: int = 0           # spans shorter than this merge into the previous
    abbreviations: tuple = ()           # trailing-period words that do not split
    scheme: str = "ws_punct"

    @classmethod
    def with_heuristics(cls) -> "SplitConfig":
        """All three documented heuristics enabled."""
        return cls(protect_short_quotes=True, merge_min_tokens=3,
                   abbreviations=DEFAULT_ABBREVIATIONS)


@dataclass
class Passage:
    passage_id: str
    text: str
    source: str = "human"
    seed_passage_id: str | None = None
    word_count: int = 0

    def __post_init__(self):
        if self.seed_passage_id is None:
            self.seed_passage_id = self.passage_id
        wc = len(self.text.split())
        if self.word_count == 0:
            self.word_count = wc
        elif self.word_count != wc:
            raise ArgumentError(
                f"word_count {self.word_count} != whitespace token count {wc}")


@dataclass
class ExpressionSpan:
    expr_id: str
    passage_id: str
    char_start: int
    char_end: int
    tokens: list[str] = field(default_factory=list)
    pre_highlighted: bool = False

    @property
    def text_len(self) -> int:
        return self.char_end - self.char_start


def _protected_positions(text: str, cfg: SplitConfig) -> set:
    """Char indexes where punctuation must not split."""
    protected: set = set()
    if cfg.protect_short_quotes:
        for open_q, close_q in _QUOTE_PAIRS:
            start = None
            for i, ch in enumerate(text):
                if start is None:
                    if ch == open_q:
                        start = i
                elif ch == close_q:
                    inner = text[start + 1 : i]
                    if len(split_text(inner, cfg.scheme)) < cfg.quote_max_tokens:
                        protected.update(range(start + 1, i))
                    start = None
    for abbr in cfg.abbreviations:
        # protect the period that terminates the abbreviation itself
        for m in re.finditer(r"(?<!\w)" + re.escape(abbr) + r"\.", text):
            protected.add(m.end() - 1)
    return protected


def split_atomic(p: Passage, rules: SplitConfig | None = None) -> list[ExpressionSpan]:
    """Split a passage at punctuation into ordered, non-overlapping spans.

    Concatenating the spans with the skipped separator text reconstructs
    the passage; spans are whitespace-trimmed and never empty.
    """
    if not p.text.strip():
        raise ArgumentError("passage text is empty")
    cfg = rules or SplitConfig()
    protected = _protected_positions(p.text, cfg)

    raw: list[tuple[int, int]] = []
    seg_start = 0
    for i, ch in enumerate(p.text):
        if ch in SPLIT_CHARS and i not in protected:
            raw.append((seg_start, i))
            seg_start = i + 1
    raw.append((seg_start, len(p.text)))

    spans: list[tuple[int, int]] = []
    for a, b in raw:
        chunk = p.text[a:b]
        lead = len(chunk) - len(chunk.lstrip())
        a, b = a + lead, a + len(chunk.rstrip())
        if a < b:
            spans.append((a, b))

    if cfg.merge_min_tokens > 1:
        merged: list[tuple[int, int]] = []
        for a, b in spans:
            n_tok = len(split_text(p.text[a:b], cfg.scheme))
            if merged and n_tok < cfg.merge_min_tokens:
                merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        spans = merged

    out = []
    for k, (a, b) in enumerate(spans):
        out.append(ExpressionSpan(
            expr_id=f"{p.passage_id}:{k:03d}",
            passage_id=p.passage_id,
            char_start=a,
            char_end=b,
            tokens=split_text(p.text[a:b], cfg.scheme),
        ))
    return out


def mark_pre_highlighted(spans: list[ExpressionSpan], selected) -> list[ExpressionSpan]:
    selected = set(selected)
    return [replace(s, pre_highlighted=s.expr_id in selected) for s in spans]
