"""Approximate expression matching: subset either way, or Levenshtein
ratio at least 90%, on normalized text.
"""

from __future__ import annotations

from ..errors import ArgumentError
from ..similarity import ratio

RATIO_THRESHOLD = 0.90
_TRAILING_PUNCT = ".,;:!?…—"  # stripped from normalized ends


def normalize_for_match(text: str) -> str:
    """Case-fold, collapse whitespace, drop terminal punctuation."""
    collapsed = " ".join(text.casefold().split())
    return collapsed.strip(_TRAILING_PUNCT).strip()


def match_ratio(a: str, b: str) -> float:
    return ratio(normalize_for_match(a), normalize_for_match(b))


def approx_match(a: str, b: str,
                 ratio_threshold: float = RATIO_THRESHOLD) -> bool:
    na, nb = normalize_for_match(a), normalize_for_match(b)
    if not na or not nb:
        raise ArgumentError("cannot match an empty expression")
    if na in nb or nb in na:
        return True
    return ratio(na, nb) >= ratio_threshold
