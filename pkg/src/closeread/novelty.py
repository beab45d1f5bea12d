"""Novelty profiling of expressions against a reference-corpus index.

n* is the smallest n at which the expression contains an n-gram with
corpus count zero; NovelPct is the fraction of the expression's n*-grams
that are absent.  An expression fully contained in the corpus has no n*
and NovelPct 0 by convention, which keeps the pre-highlighting threshold
well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .ngram_index import FLOOR_EPSILON, MODE_FULL, SuffixIndex
from .segmentation import ExpressionSpan, Passage
from .tokenization import split_text


@dataclass
class NoveltyProfile:
    expr_id: str
    n_star: int | None
    novel_pct: float
    ppl: float
    ppl_log_std: float | None = None


@dataclass
class ContaminationSample:
    start: int           # token offset of the sampled n-gram
    region: str          # beginning | middle | end | all
    count: int


@dataclass
class ContaminationReport:
    passed: bool
    n: int
    k: int
    seed: int
    samples: list[ContaminationSample] = field(default_factory=list)
    reduced_coverage: bool = False

    @property
    def offending(self) -> list[ContaminationSample]:
        return [s for s in self.samples if s.count > 0]


def _expr_ids(expr, index: SuffixIndex) -> list:
    """Token ids of an expression in the index vocab; unseen -> None."""
    if isinstance(expr, ExpressionSpan):
        tokens = expr.tokens
    else:
        tokens = list(expr)
    if not tokens:
        raise ArgumentError("expression has no tokens")
    if tokens and isinstance(tokens[0], str):
        return [index.vocab.id(t) for t in tokens]
    return tokens


def novelty_profile(expr, index: SuffixIndex,
                    floor_policy: str = FLOOR_EPSILON,
                    ppl_mode: str = MODE_FULL) -> NoveltyProfile:
    """n*, NovelPct and expression perplexity for one expression."""
    ids = _expr_ids(expr, index)
    expr_id = expr.expr_id if isinstance(expr, ExpressionSpan) else ""
    n_star = None
    novel_pct = 0.0
    for n in range(1, len(ids) + 1):
        grams = [ids[i : i + n] for i in range(len(ids) - n + 1)]
        zeros = sum(1 for g in grams if index.count_ids(g) == 0)
        if zeros:
            n_star = n
            novel_pct = zeros / len(grams)
            break
    res = index.expression_perplexity(ids, floor_policy=floor_policy, mode=ppl_mode)
    return NoveltyProfile(expr_id, n_star, novel_pct, res.ppl)


def select_for_annotation(profiles, threshold: float = 0.15) -> set:
    """Expression ids whose novel_pct clears the pre-highlight threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ArgumentError("threshold must lie in [0, 1]")
    return {pr.expr_id for pr in profiles if pr.novel_pct >= threshold}


def contamination_check(p, index: SuffixIndex, k: int = 5, n: int = 15,
                        seed: int = 0) -> ContaminationReport:
    """Verify a passage is absent from the corpus by sampling n-grams.

    k n-grams are drawn (seeded, without replacement) from each third of
    the passage; the check passes iff every sampled n-gram has corpus
    count zero.  Passages shorter than 3n tokens are checked over all
    available n-grams instead and flagged reduced_coverage.
    """
    text = p.text if isinstance(p, Passage) else p
    tokens = split_text(text, index.sequence.scheme)
    ids = [index.vocab.id(t) for t in tokens]
    L = len(ids)
    samples: list[ContaminationSample] = []
    rng = np.random.default_rng(seed)

    def add(start: int, region: str):
        c = index.count_ids(ids[start : start + n])
        samples.append(ContaminationSample(int(start), region, c))

    if L >= 3 * n:
        third = L // 3
        regions = [("beginning", 0, third), ("middle", third, 2 * third),
                   ("end", 2 * third, L - n + 1)]
        for name, lo, hi in regions:
            starts = np.arange(lo, hi)
            take = min(k, starts.size)
            for s in sorted(rng.choice(starts, size=take, replace=False)):
                add(s, name)
        reduced = False
    else:
        for s in range(0, max(L - n + 1, 0)):
            add(s, "all")
        reduced = True

    passed = all(s.count == 0 for s in samples)
    return ContaminationReport(passed, n, k, seed, samples, reduced)


def log_ppl_values(profiles) -> np.ndarray:
    """Finite log-perplexities of a profile list (infinite entries dropped)."""
    vals = [math.log(pr.ppl) for pr in profiles if math.isfinite(pr.ppl)]
    return np.asarray(vals, dtype=np.float64)
