"""Precision/recall/F1 of predicted expression lists against gold sets.

A prediction is a true positive when it approximately matches at least
one gold expression and a false positive otherwise; every gold
expression with no matching prediction is a false negative.  By default
a gold item may absorb several predictions ("many-to-one"); pass
one_to_one=True to make each gold item consumable exactly once.
Counts are micro-averaged across passages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, FormatError, NotFoundError
from .matching import RATIO_THRESHOLD, approx_match, normalize_for_match

TASKS = ("novel", "non_pragmatic")
CI_METHOD = "percentile-bootstrap"


@dataclass(frozen=True)
class PredictionSet:
    passage_id: str
    task: str
    predictor_id: str
    expressions: tuple

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ArgumentError(f"unknown task {self.task!r}")
        for e in self.expressions:
            if not isinstance(e, str) or not e.strip():
                raise ArgumentError(
                    f"empty prediction in set for {self.passage_id!r}")


@dataclass(frozen=True)
class PassageCounts:
    passage_id: str
    tp: int
    fp: int
    fn: int


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_passage: list
    matching: str                 # "many-to-one" | "one-to-one"
    ci_low: float | None = None
    ci_high: float | None = None
    ci_method: str = CI_METHOD


def _prf(tp: int, fp: int, fn: int) -> tuple:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def _dedup(texts) -> list:
    """Keep the first of every normalized duplicate, preserving order."""
    seen = set()
    out = []
    for t in texts:
        key = normalize_for_match(t)
        if not key:
            raise ArgumentError(f"expression normalizes to nothing: {t!r}")
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


def score_passage(predictions, gold, one_to_one: bool = False,
                  ratio_threshold: float = RATIO_THRESHOLD) -> tuple:
    """(tp, fp, fn) for one passage."""
    preds = _dedup(predictions)
    gold = _dedup(gold)
    tp = fp = 0
    if one_to_one:
        taken = [False] * len(gold)
        for p in preds:
            for j, g in enumerate(gold):
                if not taken[j] and approx_match(p, g, ratio_threshold):
                    taken[j] = True
                    tp += 1
                    break
            else:
                fp += 1
        fn = taken.count(False)
    else:
        hit = [False] * len(gold)
        for p in preds:
            matches = [j for j, g in enumerate(gold)
                       if approx_match(p, g, ratio_threshold)]
            if matches:
                tp += 1
                for j in matches:
                    hit[j] = True
            else:
                fp += 1
        fn = hit.count(False)
    return tp, fp, fn


def score_predictions(pred_sets, gold_by_passage: dict,
                      one_to_one: bool = False, resamples: int = 0,
                      seed: int = 0,
                      ratio_threshold: float = RATIO_THRESHOLD) -> EvalReport:
    """Micro-averaged report over every passage in the gold mapping.

    Passages with no prediction set contribute all their gold items as
    false negatives; a prediction for a passage outside the gold mapping
    is an error.  With resamples > 0 a seeded percentile bootstrap over
    passages produces the 95% CI.
    """
    if isinstance(pred_sets, PredictionSet):
        pred_sets = [pred_sets]
    by_passage: dict[str, list] = {}
    tasks = set()
    for ps in pred_sets:
        ps.validate()
        tasks.add(ps.task)
        if ps.passage_id not in gold_by_passage:
            raise NotFoundError(f"no gold for passage {ps.passage_id!r}")
        by_passage.setdefault(ps.passage_id, []).extend(ps.expressions)
    if len(tasks) > 1:
        raise ArgumentError(f"prediction sets mix tasks: {sorted(tasks)}")

    per_passage = []
    for pid in sorted(gold_by_passage):
        tp, fp, fn = score_passage(by_passage.get(pid, []),
                                   gold_by_passage[pid], one_to_one,
                                   ratio_threshold)
        per_passage.append(PassageCounts(pid, tp, fp, fn))

    tp = sum(c.tp for c in per_passage)
    fp = sum(c.fp for c in per_passage)
    fn = sum(c.fn for c in per_passage)
    precision, recall, f1 = _prf(tp, fp, fn)
    report = EvalReport(tp, fp, fn, precision, recall, f1, per_passage,
                        "one-to-one" if one_to_one else "many-to-one")
    if resamples > 0:
        report.ci_low, report.ci_high = bootstrap_ci(per_passage, resamples,
                                                     seed)
    return report


def micro_f1(counts) -> float:
    tp = sum(c.tp for c in counts)
    fp = sum(c.fp for c in counts)
    fn = sum(c.fn for c in counts)
    return _prf(tp, fp, fn)[2]


def bootstrap_ci(per_passage_counts, resamples: int = 10000,
                 seed: int = 0) -> tuple:
    """Seeded percentile bootstrap of micro-F1 over passages."""
    counts = list(per_passage_counts)
    n = len(counts)
    if n < 2:
        raise ArgumentError("bootstrap needs at least 2 passages")
    if resamples < 1:
        raise ArgumentError("resamples must be positive")
    tp = np.array([c.tp for c in counts], dtype=np.float64)
    fp = np.array([c.fp for c in counts], dtype=np.float64)
    fn = np.array([c.fn for c in counts], dtype=np.float64)

    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(resamples, n))
    tps, fps, fns = tp[idx].sum(axis=1), fp[idx].sum(axis=1), fn[idx].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(tps + fps > 0, tps / (tps + fps), 0.0)
        rec = np.where(tps + fns > 0, tps / (tps + fns), 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    lo, hi = np.quantile(f1, [0.025, 0.975])
    return float(lo), float(hi)


def load_predictions(path) -> list:
    """Line-delimited {passage_id, task, predictor_id, expressions} records."""
    out = []
    with open(Path(path), encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                ps = PredictionSet(rec["passage_id"], rec["task"],
                                   rec["predictor_id"],
                                   tuple(rec["expressions"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FormatError(f"{path}:{lineno}: bad prediction record "
                                  f"({exc})")
            ps.validate()
            out.append(ps)
    return out


def write_predictions(pred_sets, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as f:
        for ps in pred_sets:
            f.write(json.dumps({
                "passage_id": ps.passage_id, "task": ps.task,
                "predictor_id": ps.predictor_id,
                "expressions": list(ps.expressions)},
                sort_keys=True, ensure_ascii=False) + "\n")
