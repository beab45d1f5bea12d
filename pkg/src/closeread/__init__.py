"""closeread: n-gram novelty indexing and close-reading creativity analysis.

Subpackages: ngram_index (suffix-array corpus index and backoff
probabilities), segmentation (atomic expressions), novelty (profiles,
selection, contamination), annotation (store, agreement, dedup, export),
service (HTTP annotation API), evaluation (approximate-match F1),
stats (mixed-effects logistic analyses), cli (command-line pipeline).
"""

__version__ = "0.1.0"

from .ngram_index import (FLOOR_EPSILON, FLOOR_FLAG, MODE_BIGRAM, MODE_FULL,
                          SuffixIndex, build_index, count,
                          expression_perplexity, infty_prob)
from .novelty import (ContaminationReport, NoveltyProfile, contamination_check,
                      novelty_profile, select_for_annotation)
from .segmentation import (ExpressionSpan, Passage, SplitConfig,
                           mark_pre_highlighted, split_atomic)
from .tokenization import TokenSequence, tokenize, tokenize_corpus

__all__ = [
    "__version__",
    "SuffixIndex", "build_index", "count", "infty_prob",
    "expression_perplexity",
    "FLOOR_EPSILON", "FLOOR_FLAG", "MODE_FULL", "MODE_BIGRAM",
    "NoveltyProfile", "ContaminationReport", "novelty_profile",
    "select_for_annotation", "contamination_check",
    "Passage", "ExpressionSpan", "SplitConfig", "split_atomic",
    "mark_pre_highlighted",
    "TokenSequence", "tokenize", "tokenize_corpus",
]
