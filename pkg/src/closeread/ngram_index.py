"""Suffix-array n-gram index with longest-suffix backoff probabilities.

Counting model: an n-gram occurs wherever it appears as a contiguous token
run inside a single document; runs never cross document boundaries.  The
index realizes this by building the suffix array over an augmented array
in which real token ids are shifted by +1 and a separator id 0 sits after
every document, so a query (which never contains the separator) cannot
match across documents.

The backoff probability of token w after a context is
``cnt(s + w) / cnt(s)`` where s is the longest context suffix that occurs
at all; the empty suffix always occurs, with count equal to the corpus
token count.  Expression perplexity is the geometric-mean inverse of the
consecutive backoff probabilities.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ArgumentError, FormatError
from .tokenization import TokenSequence, Vocab, encode

_SEP = 0  # separator id inside the augmented array; real ids are shifted +1

_MAGIC = b"NLIX"
_VERSION = 1

FLOOR_EPSILON = "epsilon"
FLOOR_FLAG = "flag"

MODE_FULL = "full"
MODE_BIGRAM = "bigram"


@dataclass
class BackoffResult:
    """One conditional probability with its backoff provenance."""

    probability: float
    effective_n: int
    numerator_count: int
    denominator_count: int


@dataclass
class PerplexityResult:
    ppl: float
    infinite: bool
    floored_tokens: int
    n_tokens: int
    steps: list = field(default_factory=list)


class SuffixIndex:
    """Immutable suffix-array index over a TokenSequence.

    Build once, then query from any number of threads; no method mutates
    state after construction.
    """

    def __init__(self, sequence: TokenSequence, aug: np.ndarray, sa: np.ndarray):
        self.sequence = sequence
        self._aug = aug
        self._sa = sa

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, sequence: TokenSequence) -> "SuffixIndex":
        if len(sequence) == 0:
            raise ArgumentError("cannot build an index over an empty sequence")
        aug = _augment(sequence)
        sa = _kernels.build_suffix_array(aug)
        return cls(sequence, aug, sa)

    # -- queries -----------------------------------------------------------

    @property
    def n_tokens(self) -> int:
        return len(self.sequence)

    @property
    def vocab(self) -> Vocab:
        return self.sequence.vocab

    def count_ids(self, ids) -> int:
        """Occurrences of the id sequence; None (unseen) anywhere -> 0."""
        ids = list(ids)
        if not ids:
            raise ArgumentError("count query must be non-empty")
        if any(i is None or i < 0 or i >= len(self.vocab) for i in ids):
            return 0
        q = np.asarray(ids, dtype=np.int64) + 1
        lo, hi = _kernels.suffix_bounds(self._aug, self._sa, q)
        return hi - lo

    def count_text(self, text: str) -> int:
        return self.count_ids(encode(text, self.vocab, self.sequence.scheme))

    def infty_prob(self, context, w) -> BackoffResult:
        """Backoff probability of token w after the given context ids.

        context may be empty; its entries may be None (unseen words count
        zero, so backoff skips past them naturally).
        """
        context = list(context)
        # longest suffix of the context with nonzero count; empty suffix
        # falls back to the corpus unigram distribution
        for j in range(len(context) + 1):
            suffix = context[j:]
            if not suffix:
                denom = self.n_tokens
                break
            denom = self.count_ids(suffix)
            if denom > 0:
                break
        numer = self.count_ids(suffix + [w]) if denom > 0 else 0
        prob = numer / denom if denom > 0 else 0.0
        return BackoffResult(prob, len(suffix) + 1, numer, denom)

    def expression_perplexity(self, expr, floor_policy: str = FLOOR_EPSILON,
                              mode: str = MODE_FULL, prefix=()) -> PerplexityResult:
        """Perplexity of an expression under consecutive backoff probabilities.

        mode "full" conditions each token on the entire expression prefix
        (plus the optional passage ``prefix``); "bigram" conditions on the
        previous token only.  Zero-probability tokens are floored at
        1/(corpus size + 1) under the "epsilon" policy, or make the result
        infinite under "flag"; either way the floored count is reported.
        """
        expr = list(expr)
        if not expr:
            raise ArgumentError("expression must be non-empty")
        if floor_policy not in (FLOOR_EPSILON, FLOOR_FLAG):
            raise ArgumentError(f"unknown floor policy {floor_policy!r}")
        if mode not in (MODE_FULL, MODE_BIGRAM):
            raise ArgumentError(f"unknown perplexity mode {mode!r}")
        prefix = list(prefix)
        steps = []
        floored = 0
        log_sum = 0.0
        floor_log = -math.log(self.n_tokens + 1)
        for i, w in enumerate(expr):
            history = prefix + expr[:i]
            if mode == MODE_BIGRAM:
                history = history[-1:]
            step = self.infty_prob(history, w)
            steps.append(step)
            if step.numerator_count > 0:
                log_sum += math.log(step.numerator_count) - math.log(step.denominator_count)
            else:
                floored += 1
                log_sum += floor_log
        n = len(expr)
        if floored and floor_policy == FLOOR_FLAG:
            return PerplexityResult(math.inf, True, floored, n, steps)
        return PerplexityResult(math.exp(-log_sum / n), False, floored, n, steps)

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        seq = self.sequence
        scheme_b = seq.scheme.encode("utf-8")
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<IIQQQ", _VERSION, len(scheme_b),
                                len(seq.vocab), len(seq), seq.n_docs))
            f.write(scheme_b)
            for s in seq.vocab.strings():
                b = s.encode("utf-8")
                f.write(struct.pack("<I", len(b)))
                f.write(b)
            f.write(seq.tokens.astype("<u4").tobytes())
            f.write(seq.doc_boundaries.astype("<u8").tobytes())
            f.write(self._sa.astype("<u8").tobytes())

    @classmethod
    def load(cls, path) -> "SuffixIndex":
        with open(path, "rb") as f:
            magic = f.read(4)
            if magic != _MAGIC:
                raise FormatError(f"bad index magic {magic!r}")
            header = f.read(struct.calcsize("<IIQQQ"))
            version, scheme_len, vocab_size, n_tokens, n_docs = struct.unpack("<IIQQQ", header)
            if version != _VERSION:
                raise FormatError(f"unsupported index version {version}")
            scheme = f.read(scheme_len).decode("utf-8")
            vocab = Vocab()
            for _ in range(vocab_size):
                (blen,) = struct.unpack("<I", f.read(4))
                vocab.add(f.read(blen).decode("utf-8"))
            tokens = np.frombuffer(f.read(4 * n_tokens), dtype="<u4").astype(np.int64)
            bounds = np.frombuffer(f.read(8 * n_docs), dtype="<u8").astype(np.int64)
            seq = TokenSequence(tokens, vocab, bounds, scheme)
            sa = np.frombuffer(f.read(8 * (n_tokens + n_docs)), dtype="<u8").astype(np.int64)
            if sa.size != n_tokens + n_docs:
                raise FormatError("truncated suffix array")
        return cls(seq, _augment(seq), sa)


def _augment(seq: TokenSequence) -> np.ndarray:
    """Shift ids by +1 and place separator 0 after every document."""
    n = len(seq)
    aug = np.empty(n + seq.n_docs, dtype=np.int64)
    pos = 0
    start = 0
    for end in seq.doc_boundaries:
        end = int(end)
        aug[pos : pos + (end - start)] = seq.tokens[start:end] + 1
        pos += end - start
        aug[pos] = _SEP
        pos += 1
        start = end
    return aug


# Operation-level wrappers matching the module contract names.


def build_index(seq: TokenSequence) -> SuffixIndex:
    return SuffixIndex.build(seq)


def count(index: SuffixIndex, g) -> int:
    return index.count_ids(g)


def infty_prob(index: SuffixIndex, context, w) -> BackoffResult:
    return index.infty_prob(context, w)


def expression_perplexity(index: SuffixIndex, expr,
                          floor_policy: str = FLOOR_EPSILON,
                          mode: str = MODE_FULL, prefix=()) -> PerplexityResult:
    return index.expression_perplexity(expr, floor_policy, mode, prefix)
