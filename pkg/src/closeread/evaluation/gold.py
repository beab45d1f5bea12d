"""Gold-standard construction for the expression-identification tasks.

Gold aggregation is union-with-dedup: an expression enters the novel
gold set when any annotator judged it novel, or highlighted it (after
highlight deduplication); it enters the non_pragmatic set when any
annotator marked it not pragmatic.  The split holds 3 few-shot passages
aside, then assigns 40% of all passages to evaluation from the
remainder, leaving 60% (few-shot passages included) for finetuning.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import numpy as np

from ..annotation.export import merged_expressions
from ..errors import ArgumentError
from .matching import normalize_for_match
from .scoring import TASKS


@dataclass(frozen=True)
class SplitConfig:
    n_few_shot: int = 3
    eval_fraction: float = 0.4
    seed: int = 0

    def validate(self) -> None:
        if self.n_few_shot < 0:
            raise ArgumentError("n_few_shot must be >= 0")
        if not 0.0 <= self.eval_fraction < 1.0:
            raise ArgumentError("eval_fraction must be in [0, 1)")


@dataclass(frozen=True)
class GoldSplit:
    few_shot: tuple
    finetune: tuple          # includes the few-shot passages
    evaluation: tuple


@dataclass
class GoldStandard:
    task: str
    gold: dict               # passage_id -> tuple of expression texts
    split: GoldSplit
    aggregation: str = "union-with-dedup"
    annotation_counts: dict = field(default_factory=dict)

    def eval_gold(self) -> dict:
        return {pid: self.gold[pid] for pid in self.split.evaluation}


def split_passages(counts: dict, config: SplitConfig = SplitConfig()) -> GoldSplit:
    """Assign passages to few-shot / finetune / evaluation.

    counts: passage_id -> number of task annotations; few-shot passages
    are drawn from those nearest the median count, widening the band
    only as far as needed.
    """
    config.validate()
    ids = sorted(counts)
    if not ids:
        raise ArgumentError("no passages to split")
    n_few = min(config.n_few_shot, len(ids))
    rng = np.random.default_rng(config.seed)

    med = statistics.median(counts[p] for p in ids)
    by_distance = sorted(ids, key=lambda p: (abs(counts[p] - med), p))
    pool_edge = abs(counts[by_distance[n_few - 1]] - med) if n_few else -1.0
    pool = [p for p in by_distance if abs(counts[p] - med) <= pool_edge]
    few_shot = (sorted(str(p) for p in rng.choice(pool, size=n_few,
                                                  replace=False))
                if n_few else [])

    remaining = [p for p in ids if p not in set(few_shot)]
    n_eval = min(round(config.eval_fraction * len(ids)), len(remaining))
    evaluation = sorted(str(p) for p in rng.choice(remaining, size=n_eval,
                                                   replace=False))
    eval_set = set(evaluation)
    finetune = [p for p in ids if p not in eval_set]
    return GoldSplit(tuple(few_shot), tuple(finetune), tuple(evaluation))


def _dedup_texts(texts) -> tuple:
    seen = set()
    out = []
    for t in texts:
        key = normalize_for_match(t)
        if key and key not in seen:
            seen.add(key)
            out.append(t)
    return tuple(out)


def build_gold(store, task: str,
               config: SplitConfig = SplitConfig()) -> GoldStandard:
    if task not in TASKS:
        raise ArgumentError(f"unknown task {task!r}")
    ratings = store.live_ratings()
    passage_of = {s.expr_id: s.passage_id for s in store.expressions()}
    passage_ids = [p.passage_id for p in store.passages()]

    rated_annotators: dict[str, set] = {}
    novel_exprs = set()
    nonprag_exprs = set()
    counts = {pid: 0 for pid in passage_ids}
    for r in ratings:
        rated_annotators.setdefault(r.expr_id, set()).add(r.annotator_id)
        if r.novel:
            novel_exprs.add(r.expr_id)
        if not r.pragmatic:
            nonprag_exprs.add(r.expr_id)
        hit = r.novel if task == "novel" else not r.pragmatic
        counts[passage_of[r.expr_id]] += int(hit)

    gold_texts: dict[str, list] = {pid: [] for pid in passage_ids}
    if task == "novel":
        for h in store.highlights():  # every highlight is a novel annotation
            counts[h.passage_id] += 1
        for m in merged_expressions(store):
            if m.origin == "highlight":
                gold_texts[m.passage_id].append(m.text)
                continue
            raters = rated_annotators.get(m.expr_id, set())
            folded = any(lab and ann not in raters
                         for ann, lab in m.labels.items())
            if m.expr_id in novel_exprs or folded:
                gold_texts[m.passage_id].append(m.text)
    else:
        for s in store.expressions():
            if s.expr_id in nonprag_exprs:
                gold_texts[s.passage_id].append(
                    store.expression_text(s.expr_id))

    gold = {pid: _dedup_texts(texts) for pid, texts in gold_texts.items()}
    split = split_passages(counts, config)
    return GoldStandard(task, gold, split, annotation_counts=counts)
