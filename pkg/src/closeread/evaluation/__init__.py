"""Scoring predicted novel / non-pragmatic expressions against gold."""

from .gold import GoldSplit, GoldStandard, SplitConfig, build_gold, split_passages
from .matching import (RATIO_THRESHOLD, approx_match, match_ratio,
                       normalize_for_match)
from .scoring import (CI_METHOD, TASKS, EvalReport, PassageCounts,
                      PredictionSet, bootstrap_ci, load_predictions, micro_f1,
                      score_passage, score_predictions, write_predictions)

__all__ = [
    "RATIO_THRESHOLD", "approx_match", "match_ratio", "normalize_for_match",
    "TASKS", "CI_METHOD", "PredictionSet", "PassageCounts", "EvalReport",
    "score_passage", "score_predictions", "micro_f1", "bootstrap_ci",
    "load_predictions", "write_predictions",
    "SplitConfig", "GoldSplit", "GoldStandard", "build_gold", "split_passages",
]
