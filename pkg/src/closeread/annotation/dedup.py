"""Merging annotator highlights into the rated-expression table.

Rated (pre-highlighted) expressions enter first, then highlights in
timestamp order.  A highlight whose text is a substring or superstring
of an already-included expression on the same passage, or at least 90%
similar by Levenshtein ratio, is folded into that expression instead of
creating a new row: the highlighting annotator contributes a creative
label to the surviving expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..similarity import ratio
from .records import HighlightRecord, RatingRecord

SIMILARITY_THRESHOLD = 0.90


@dataclass
class MergedExpression:
    expr_id: str            # rated expr_id, or synthetic hl:<passage>:<n>
    passage_id: str
    text: str
    origin: str             # "rated" | "highlight"
    labels: dict = field(default_factory=dict)  # annotator_id -> creative bool


def _normalize(s: str) -> str:
    return " ".join(s.casefold().split())


def _duplicate(a: str, b: str, threshold: float) -> bool:
    na, nb = _normalize(a), _normalize(b)
    if na in nb or nb in na:
        return True
    return ratio(na, nb) >= threshold


def dedup_highlights(ratings, highlights, expr_texts, passage_of_expr,
                     highlight_texts=None,
                     threshold: float = SIMILARITY_THRESHOLD) -> list[MergedExpression]:
    """Merge ratings and free highlights into one creative-expression table.

    ratings: RatingRecord list (pre-highlighted expressions, already rated)
    highlights: HighlightRecord list
    expr_texts: expr_id -> expression text
    passage_of_expr: expr_id -> passage_id
    highlight_texts: optional parallel list of highlight texts; when omitted
        the records must carry .text (useful in tests)
    """
    merged: list[MergedExpression] = []
    by_expr: dict[str, MergedExpression] = {}
    for r in sorted(ratings, key=lambda r: (r.expr_id, r.annotator_id)):
        m = by_expr.get(r.expr_id)
        if m is None:
            m = MergedExpression(r.expr_id, passage_of_expr[r.expr_id],
                                 expr_texts[r.expr_id], "rated")
            by_expr[r.expr_id] = m
            merged.append(m)
        m.labels[r.annotator_id] = r.creative

    if highlight_texts is None:
        highlight_texts = [h.text for h in highlights]  # type: ignore[attr-defined]
    order = sorted(range(len(highlights)),
                   key=lambda i: (highlights[i].timestamp, i))
    counter = 0
    for i in order:
        h = highlights[i]
        text = highlight_texts[i]
        home = None
        for m in merged:
            if m.passage_id == h.passage_id and _duplicate(text, m.text, threshold):
                home = m
                break
        if home is not None:
            # rated expressions keep the annotator's explicit rating when
            # one exists; otherwise the highlight stands as creative=true
            home.labels.setdefault(h.annotator_id, True)
        else:
            counter += 1
            m = MergedExpression(f"hl:{h.passage_id}:{counter:03d}",
                                 h.passage_id, text, "highlight",
                                 {h.annotator_id: True})
            merged.append(m)
    return merged


def augment_with_implicit_negatives(merged, annotators_of_passage) -> list[MergedExpression]:
    """Non-highlighting annotators judged highlight-only expressions
    non-creative; rated expressions are left to their explicit ratings."""
    for m in merged:
        if m.origin != "highlight":
            continue
        for ann in annotators_of_passage(m.passage_id):
            m.labels.setdefault(ann, False)
    return merged
