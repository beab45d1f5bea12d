"""Preference-alignment model: do novelty/pragmaticality deltas predict
which passage a judge preferred?
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ArgumentError
from .glmm import ModelFit, fit_logit_varying_intercepts

EXPERT_GROUPS = ("annotator", "seed_author", "author_in_seed")
CROWD_GROUPS = ("model_a", "model_b")


def per_word_delta(count_a: float, words_a: int,
                   count_b: float, words_b: int) -> float:
    """count_a/words_a - count_b/words_b (scores normalized by passage length)."""
    if words_a <= 0 or words_b <= 0:
        raise ArgumentError("word counts must be positive")
    return count_a / words_a - count_b / words_b


def nested_level(outer: str, inner: str) -> str:
    """Level id for a factor nested in another (inner varies within outer)."""
    return f"{outer}/{inner}"


@dataclass(frozen=True)
class PreferencePair:
    pair_id: str
    passage_a: str
    passage_b: str
    preferred: str              # "A" or "B"
    delta_nov: float
    delta_prag: float
    groups: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.preferred not in ("A", "B"):
            raise ArgumentError(
                f"pair {self.pair_id}: preferred must be 'A' or 'B'")
        for name, d in (("delta_nov", self.delta_nov),
                        ("delta_prag", self.delta_prag)):
            if not math.isfinite(d):
                raise ArgumentError(f"pair {self.pair_id}: {name} not finite")


def fit_preference_model(pairs, groups=EXPERT_GROUPS, **fit_kwargs) -> ModelFit:
    """Logistic model of preferred==A on delta_nov + delta_prag.

    `groups` declares the random-intercept factors; every pair must carry
    an id for each (use CROWD_GROUPS for side-by-side model comparisons).
    Constant delta columns — e.g. all deltas zero — are dropped by the
    fitter with a warning, leaving an intercept-only model.
    """
    pairs = list(pairs)
    if not pairs:
        raise ArgumentError("no preference pairs")
    groups = tuple(groups)
    rows = []
    for pair in pairs:
        pair.validate()
        row = {
            "preferred_a": pair.preferred == "A",
            "delta_nov": pair.delta_nov,
            "delta_prag": pair.delta_prag,
        }
        for g in groups:
            if g not in pair.groups:
                raise ArgumentError(
                    f"pair {pair.pair_id} missing grouping id {g!r}")
            row[g] = str(pair.groups[g])
        rows.append(row)
    parts = ["preferred_a ~ delta_nov + delta_prag"]
    parts += [f"(1|{g})" for g in groups]
    return fit_logit_varying_intercepts(rows, " + ".join(parts), **fit_kwargs)
